//! Three small continuous-control tasks integrated with semi-implicit Euler.
//!
//! * pendulum: state `[cos θ, sin θ, ω]`, θ measured from hanging down
//!   (upright is θ = π), torque `τ_max·a`.
//! * point_mass: state `[x, y, vx, vy]` on a plane tilted along `-y`, force
//!   `f_max·a` with per-axis gains from `link_scales`.
//! * cartpole_lite: state `[x, ẋ, cos θ, sin θ, θ̇]`, θ = 0 upright, cart force
//!   `f_max·a`; terminates once `|θ| > 0.8`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::common::{Environment, RngStream};
use crate::envs::perturbation::PerturbationConfig;
use crate::error::{PadaError, Result};
use crate::planner::ActionBox;

pub const DT: f64 = 0.05;

pub mod pendulum {
    pub const MASS: f64 = 1.0;
    pub const LENGTH: f64 = 1.0;
    pub const GRAVITY: f64 = 9.81;
    pub const DAMPING: f64 = 0.3;
    pub const MAX_TORQUE: f64 = 5.0;
    pub const EPISODE_STEPS: usize = 200;
}

pub mod point_mass {
    pub const MASS: f64 = 1.0;
    pub const MAX_FORCE: f64 = 2.0;
    pub const DAMPING: f64 = 0.5;
    /// In-plane gravity component from the plane's tilt.
    pub const SLOPE_GRAVITY: f64 = 0.5;
    pub const GOAL: [f64; 2] = [0.5, 0.5];
    pub const EPISODE_STEPS: usize = 100;
}

pub mod cartpole {
    pub const CART_MASS: f64 = 1.0;
    pub const POLE_MASS: f64 = 0.1;
    /// Half the pole length.
    pub const HALF_LENGTH: f64 = 0.5;
    pub const GRAVITY: f64 = 9.81;
    pub const CART_DAMPING: f64 = 0.1;
    pub const POLE_DAMPING: f64 = 0.002;
    pub const MAX_FORCE: f64 = 10.0;
    pub const FAIL_ANGLE: f64 = 0.8;
    pub const EPISODE_STEPS: usize = 200;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    Pendulum,
    PointMass,
    CartpoleLite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub kind: EnvKind,
    pub state_dim: usize,
    pub action_dim: usize,
    pub action_bounds: ActionBox,
    pub dt: f64,
    pub max_episode_steps: usize,
}

impl EnvSpec {
    pub fn new(kind: EnvKind) -> Self {
        let (state_dim, action_dim, max_episode_steps) = match kind {
            EnvKind::Pendulum => (3, 1, pendulum::EPISODE_STEPS),
            EnvKind::PointMass => (4, 2, point_mass::EPISODE_STEPS),
            EnvKind::CartpoleLite => (5, 1, cartpole::EPISODE_STEPS),
        };
        Self {
            kind,
            state_dim,
            action_dim,
            action_bounds: ActionBox::symmetric(action_dim),
            dt: DT,
            max_episode_steps,
        }
    }

    pub fn pendulum() -> Self {
        Self::new(EnvKind::Pendulum)
    }

    pub fn point_mass() -> Self {
        Self::new(EnvKind::PointMass)
    }

    pub fn cartpole_lite() -> Self {
        Self::new(EnvKind::CartpoleLite)
    }

    /// State-only reward in `(0, 1]`.
    pub fn reward(&self, s: &[f64]) -> f64 {
        match self.kind {
            EnvKind::Pendulum => {
                let from_up = upright_error(s[0], s[1]);
                (-(from_up * from_up + 0.1 * s[2] * s[2])).exp()
            }
            EnvKind::PointMass => {
                let dx = s[0] - point_mass::GOAL[0];
                let dy = s[1] - point_mass::GOAL[1];
                (-(dx * dx + dy * dy) / 0.1).exp()
            }
            EnvKind::CartpoleLite => {
                let th = s[3].atan2(s[2]);
                (-(th * th + 0.1 * s[0] * s[0])).exp()
            }
        }
    }

    pub fn is_terminal(&self, s: &[f64]) -> bool {
        match self.kind {
            EnvKind::CartpoleLite => s[3].atan2(s[2]).abs() > cartpole::FAIL_ANGLE,
            _ => false,
        }
    }
}

/// Pendulum angle from upright in `[0, π]`, from the `(cos θ, sin θ)`
/// encoding with θ measured from the bottom.
pub fn upright_error(cos_t: f64, sin_t: f64) -> f64 {
    PI - sin_t.atan2(cos_t).abs()
}

/// Pendulum energy per unit `m ℓ²` at nominal parameters, zero at the
/// bottom rest state.
pub fn pendulum_energy(s: &[f64], gravity_over_length: f64) -> f64 {
    0.5 * s[2] * s[2] + gravity_over_length * (1.0 - s[0])
}

/// An environment instance: spec plus fixed perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousEnv {
    spec: EnvSpec,
    config: PerturbationConfig,
}

impl ContinuousEnv {
    pub fn new(spec: EnvSpec, config: PerturbationConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { spec, config })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn config(&self) -> &PerturbationConfig {
        &self.config
    }

    pub fn kind(&self) -> EnvKind {
        self.spec.kind
    }

    fn check_state(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.spec.state_dim {
            return Err(PadaError::DimensionMismatch {
                expected: self.spec.state_dim,
                actual: s.len(),
            });
        }
        Ok(())
    }

    /// Noise-free one-step dynamics; `action` is clipped to the bounds.
    pub fn step_mean(&self, s: &[f64], action: &[f64]) -> Result<Vec<f64>> {
        self.check_state(s)?;
        if action.len() != self.spec.action_dim {
            return Err(PadaError::DimensionMismatch {
                expected: self.spec.action_dim,
                actual: action.len(),
            });
        }
        let a = self.spec.action_bounds.clipped(action);
        let next = match self.spec.kind {
            EnvKind::Pendulum => self.pendulum_step(s, a[0]),
            EnvKind::PointMass => self.point_mass_step(s, &a),
            EnvKind::CartpoleLite => self.cartpole_step(s, a[0]),
        };
        if next.iter().all(|v| v.is_finite()) {
            Ok(next)
        } else {
            Err(PadaError::DynamicsDiverged)
        }
    }

    fn pendulum_step(&self, s: &[f64], a: f64) -> Vec<f64> {
        use pendulum::*;
        let c = &self.config;
        let m = MASS * c.mass_scale;
        let l = LENGTH * c.link_scale(0);
        let g = GRAVITY * c.gravity_scale;
        let inertia = m * l * l;
        let theta = s[1].atan2(s[0]);
        let omega = s[2];
        let acc = -(g / l) * theta.sin() - DAMPING * c.friction_scale * omega / inertia
            + MAX_TORQUE * a / inertia;
        let omega = omega + DT * acc;
        let theta = theta + DT * omega;
        vec![theta.cos(), theta.sin(), omega]
    }

    fn point_mass_step(&self, s: &[f64], a: &[f64]) -> Vec<f64> {
        use point_mass::*;
        let c = &self.config;
        let m = MASS * c.mass_scale;
        let damping = DAMPING * c.friction_scale;
        let mut out = vec![0.0; 4];
        for i in 0..2 {
            let mut force = MAX_FORCE * c.link_scale(i) * a[i] - damping * s[2 + i];
            if i == 1 {
                force -= m * SLOPE_GRAVITY * c.gravity_scale;
            }
            let v = s[2 + i] + DT * force / m;
            out[2 + i] = v;
            out[i] = s[i] + DT * v;
        }
        out
    }

    fn cartpole_step(&self, s: &[f64], a: f64) -> Vec<f64> {
        use cartpole::*;
        let c = &self.config;
        let mc = CART_MASS * c.mass_scale;
        let mp = POLE_MASS * c.mass_scale;
        let l = HALF_LENGTH * c.link_scale(0);
        let g = GRAVITY * c.gravity_scale;
        let total = mc + mp;
        let (x, xd, thd) = (s[0], s[1], s[4]);
        let th = s[3].atan2(s[2]);
        let (sin, cos) = th.sin_cos();
        let force = MAX_FORCE * a - CART_DAMPING * c.friction_scale * xd;
        let temp = (force + mp * l * thd * thd * sin) / total;
        let pole_friction = POLE_DAMPING * c.friction_scale * thd / (mp * l);
        let thdd = (g * sin - cos * temp - pole_friction) / (l * (4.0 / 3.0 - mp * cos * cos / total));
        let xdd = temp - mp * l * thdd * cos / total;
        let xd = xd + DT * xdd;
        let x = x + DT * xd;
        let thd = thd + DT * thdd;
        let th = th + DT * thd;
        vec![x, xd, th.cos(), th.sin(), thd]
    }

    /// Re-projects angle encodings onto the unit circle after noise.
    fn renormalize(&self, s: &mut [f64]) {
        let idx = match self.spec.kind {
            EnvKind::Pendulum => Some(0),
            EnvKind::CartpoleLite => Some(2),
            EnvKind::PointMass => None,
        };
        if let Some(i) = idx {
            let th = s[i + 1].atan2(s[i]);
            s[i] = th.cos();
            s[i + 1] = th.sin();
        }
    }
}

impl Environment for ContinuousEnv {
    type State = Vec<f64>;
    type Action = Vec<f64>;

    fn reset(&self, rng: &mut RngStream) -> Vec<f64> {
        match self.spec.kind {
            EnvKind::Pendulum => {
                let th = rng.uniform_range(-PI, PI);
                let om = rng.uniform_range(-1.0, 1.0);
                vec![th.cos(), th.sin(), om]
            }
            EnvKind::PointMass => {
                let x = rng.uniform_range(-1.0, 1.0);
                let y = rng.uniform_range(-1.0, 1.0);
                vec![x, y, 0.0, 0.0]
            }
            EnvKind::CartpoleLite => {
                let mut u = |w: f64| rng.uniform_range(-w, w);
                let x = u(0.1);
                let xd = u(0.05);
                let th = u(0.1);
                let thd = u(0.05);
                vec![x, xd, th.cos(), th.sin(), thd]
            }
        }
    }

    /// Motor noise, clip, integrate, transition noise. Draws nothing from
    /// `rng` when both noise levels are zero.
    fn step(&self, state: &Vec<f64>, action: &Vec<f64>, rng: &mut RngStream) -> Result<Vec<f64>> {
        let bounds = &self.spec.action_bounds;
        if !bounds.contains(action) && action.len() == bounds.dim() {
            log::warn!("action {action:?} outside bounds; clipping");
        }
        let mut a = action.clone();
        if self.config.motor_noise_std > 0.0 {
            for v in a.iter_mut() {
                *v += self.config.motor_noise_std * rng.normal();
            }
        }
        let mut next = self.step_mean(state, &a)?;
        if self.config.transition_noise_std > 0.0 {
            for v in next.iter_mut() {
                *v += self.config.transition_noise_std * rng.normal();
            }
            self.renormalize(&mut next);
        }
        if next.iter().all(|v| v.is_finite()) {
            Ok(next)
        } else {
            Err(PadaError::DynamicsDiverged)
        }
    }

    fn reward(&self, state: &Vec<f64>) -> f64 {
        self.spec.reward(state)
    }

    fn is_terminal(&self, state: &Vec<f64>) -> bool {
        self.spec.is_terminal(state)
    }

    fn check_action(&self, action: &Vec<f64>) -> Result<()> {
        let b = &self.spec.action_bounds;
        if action.len() != b.dim() {
            return Err(PadaError::DimensionMismatch {
                expected: b.dim(),
                actual: action.len(),
            });
        }
        for (dim, (v, (l, h))) in action.iter().zip(b.low.iter().zip(&b.high)).enumerate() {
            if !(l <= v && v <= h) {
                return Err(PadaError::ActionOutOfSpace { dim, value: *v });
            }
        }
        Ok(())
    }

    fn max_episode_steps(&self) -> usize {
        self.spec.max_episode_steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(kind: EnvKind, cfg: PerturbationConfig) -> ContinuousEnv {
        ContinuousEnv::new(EnvSpec::new(kind), cfg).unwrap()
    }

    #[test]
    fn hanging_rest_is_equilibrium() {
        for m in [0.5, 1.0, 1.5, 3.0] {
            let e = env(EnvKind::Pendulum, PerturbationConfig::with_mass(m));
            let s = vec![1.0, 0.0, 0.0];
            let next = e.step_mean(&s, &[0.0]).unwrap();
            assert_eq!(next, s);
        }
    }

    #[test]
    fn stronger_gravity_accelerates_more() {
        let s = vec![0.3f64.cos(), 0.3f64.sin(), 0.0];
        let acc = |gs: f64| {
            let next = env(EnvKind::Pendulum, PerturbationConfig::with_gravity(gs))
                .step_mean(&s, &[0.0])
                .unwrap();
            next[2] / DT
        };
        let (a1, a2) = (acc(1.0), acc(2.0));
        // closed form θ̈ = −(g/ℓ) sin θ from rest
        assert!((a1 + 9.81 * 0.3f64.sin()).abs() < 1e-12);
        assert!(a2.abs() > a1.abs());
    }

    #[test]
    fn angle_encoding_stays_on_circle() {
        let e = env(
            EnvKind::Pendulum,
            PerturbationConfig {
                transition_noise_std: 0.1,
                ..PerturbationConfig::identity()
            },
        );
        let mut rng = RngStream::new(0, "circle");
        let mut s = e.reset(&mut rng);
        for _ in 0..100 {
            s = e.step(&s, &vec![0.7], &mut rng).unwrap();
            assert!((s[0] * s[0] + s[1] * s[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_bounds_action_is_clipped_in_step() {
        let e = env(EnvKind::Pendulum, PerturbationConfig::identity());
        let s = vec![1.0, 0.0, 0.0];
        let mut rng = RngStream::new(0, "clip");
        assert_eq!(
            e.step(&s, &vec![3.0], &mut rng).unwrap(),
            e.step_mean(&s, &[1.0]).unwrap()
        );
        assert!(e.check_action(&vec![3.0]).is_err());
    }

    #[test]
    fn cartpole_terminates_past_fail_angle() {
        let spec = EnvSpec::cartpole_lite();
        assert!(!spec.is_terminal(&[0.0, 0.0, 0.7f64.cos(), 0.7f64.sin(), 0.0]));
        assert!(spec.is_terminal(&[0.0, 0.0, 0.9f64.cos(), -(0.9f64.sin()), 0.0]));
    }

    #[test]
    fn divergence_detected() {
        let e = env(EnvKind::PointMass, PerturbationConfig::identity());
        assert_eq!(
            e.step_mean(&[f64::INFINITY, 0.0, 0.0, 0.0], &[0.0, 0.0]),
            Err(PadaError::DynamicsDiverged)
        );
    }
}
