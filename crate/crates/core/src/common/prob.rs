//! Finite probability distributions and the two divergences the adaptation
//! analysis is stated in.

use serde::{Deserialize, Serialize};

use crate::error::{PadaError, Result};

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Probability mass over a finite outcome set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(PadaError::InvalidDistribution("no outcomes".into()));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(PadaError::InvalidDistribution(format!(
                    "entry {i} is {p}"
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(PadaError::InvalidDistribution(format!(
                "mass sums to {total}"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes a nonnegative weight vector.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(PadaError::InvalidDistribution(format!(
                "weights sum to {total}"
            )));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one outcome");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        assert!(at < n);
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

impl TryFrom<Vec<f64>> for DiscreteDistribution {
    type Error = PadaError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DiscreteDistribution> for Vec<f64> {
    fn from(d: DiscreteDistribution) -> Self {
        d.probs
    }
}

/// Total variation distance `½ Σ |p_i − q_i|`.
pub fn tv_distance(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    tv_distance_slices(p.probs(), q.probs())
}

/// Total variation on raw mass vectors; used on hot paths where the
/// vectors are known to be distributions.
pub fn tv_distance_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(PadaError::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `Σ p_i ln(p_i / q_i)` with `0 ln 0 := 0`.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    kl_divergence_slices(p.probs(), q.probs())
}

pub fn kl_divergence_slices(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(PadaError::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi == 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Err(PadaError::InfiniteDivergence { index: i });
        }
        total += pi * (pi / qi).ln();
    }
    Ok(total)
}
