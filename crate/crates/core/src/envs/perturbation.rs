use serde::{Deserialize, Serialize};

use crate::common::RngStream;
use crate::error::{PadaError, Result};

/// Source-to-target perturbation knobs. The default is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub mass_scale: f64,
    pub gravity_scale: f64,
    /// Gaussian noise added to the action before clipping (action units).
    pub motor_noise_std: f64,
    /// Multiplies the viscous damping coefficients.
    pub friction_scale: f64,
    /// Per-link multipliers; missing entries count as 1.
    pub link_scales: Vec<f64>,
    /// Gaussian noise added to the integrated state.
    pub transition_noise_std: f64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self::identity()
    }
}

impl PerturbationConfig {
    pub fn identity() -> Self {
        Self {
            mass_scale: 1.0,
            gravity_scale: 1.0,
            motor_noise_std: 0.0,
            friction_scale: 1.0,
            link_scales: Vec::new(),
            transition_noise_std: 0.0,
        }
    }

    pub fn with_mass(mass_scale: f64) -> Self {
        Self {
            mass_scale,
            ..Self::identity()
        }
    }

    pub fn with_gravity(gravity_scale: f64) -> Self {
        Self {
            gravity_scale,
            ..Self::identity()
        }
    }

    /// Every scale knob drawn from `U(0.9, 1.1)`, no noise.
    pub fn sample_multi_dof(n_links: usize, rng: &mut RngStream) -> Self {
        let mut draw = || rng.uniform_range(0.9, 1.1);
        Self {
            mass_scale: draw(),
            gravity_scale: draw(),
            motor_noise_std: 0.0,
            friction_scale: draw(),
            link_scales: (0..n_links).map(|_| draw()).collect(),
            transition_noise_std: 0.0,
        }
    }

    pub fn link_scale(&self, i: usize) -> f64 {
        self.link_scales.get(i).copied().unwrap_or(1.0)
    }

    pub fn is_noiseless(&self) -> bool {
        self.motor_noise_std == 0.0 && self.transition_noise_std == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let scales = [
            ("mass_scale", self.mass_scale),
            ("gravity_scale", self.gravity_scale),
            ("friction_scale", self.friction_scale),
        ];
        for (name, v) in scales {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PadaError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (i, v) in self.link_scales.iter().enumerate() {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(PadaError::InvalidConfig(format!("link_scales[{i}] must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("motor_noise_std", self.motor_noise_std),
            ("transition_noise_std", self.transition_noise_std),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(PadaError::InvalidConfig(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_dof_knobs_in_range() {
        for seed in 0..50 {
            let c = PerturbationConfig::sample_multi_dof(3, &mut RngStream::new(seed, "multi-dof"));
            let knobs = [c.mass_scale, c.gravity_scale, c.friction_scale]
                .into_iter()
                .chain(c.link_scales.iter().copied());
            for k in knobs {
                assert!((0.9..=1.1).contains(&k));
            }
            c.validate().unwrap();
        }
    }

    #[test]
    fn json_keys_and_defaults() {
        let c: PerturbationConfig = serde_json::from_str(r#"{"mass_scale": 1.5}"#).unwrap();
        assert_eq!(c, PerturbationConfig::with_mass(1.5));
        assert!(serde_json::from_str::<PerturbationConfig>(r#"{"mass": 1.5}"#).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(PerturbationConfig::with_mass(0.0).validate().is_err());
        let c = PerturbationConfig {
            motor_noise_std: -0.1,
            ..PerturbationConfig::identity()
        };
        assert!(c.validate().is_err());
        let c = PerturbationConfig {
            link_scales: vec![1.0, -2.0],
            ..PerturbationConfig::identity()
        };
        assert!(c.validate().is_err());
    }
}
