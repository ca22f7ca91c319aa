//! Predicted versus actual deviation along evaluation trajectories.

use serde::{Deserialize, Serialize};

use crate::adapt::deviation::DeviationModel;
use crate::common::{Environment, RngStream};
use crate::envs::{ContinuousEnv, ControlPolicy};
use crate::error::{PadaError, Result};
use crate::nn::SourceModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationPair {
    pub trajectory: usize,
    pub step: usize,
    /// `‖δ_θ(s, a)‖`.
    pub predicted: f64,
    /// `‖s′ − f̂(s, π_s(s))‖`.
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationAccuracyReport {
    pub pairs: Vec<DeviationPair>,
    /// Per-trajectory `(mean predicted, mean actual)`.
    pub trajectory_means: Vec<(f64, f64)>,
}

impl DeviationAccuracyReport {
    /// Least-squares slope of predicted on actual over trajectory means.
    pub fn slope(&self) -> Option<f64> {
        least_squares_slope(&self.trajectory_means)
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| PadaError::Io(e.to_string()))?;
        for p in &self.pairs {
            w.serialize(p).map_err(|e| PadaError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Slope of the ordinary least-squares line `y = a + b·x`; `None` when the
/// `x` values have no spread.
pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.1).sum::<f64>() / n;
    let my = points.iter().map(|p| p.0).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.1 - mx) * (p.0 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Rolls `policy` in the target for `n_trajectories` episodes (episode `i`
/// from `rng.derive(i)`) and records predicted and actual deviation at
/// every step.
pub fn deviation_accuracy_report(
    model: &DeviationModel,
    target: &ContinuousEnv,
    source_model: &SourceModel,
    source_policy: &dyn ControlPolicy,
    policy: &dyn ControlPolicy,
    n_trajectories: usize,
    rng: &RngStream,
) -> Result<DeviationAccuracyReport> {
    accuracy_report_with(
        &|s, a| model.predict(s, a),
        target,
        source_model,
        source_policy,
        policy,
        n_trajectories,
        rng,
    )
}

/// [`deviation_accuracy_report`] for any deviation predictor.
pub fn accuracy_report_with(
    predict: &dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
    target: &ContinuousEnv,
    source_model: &SourceModel,
    source_policy: &dyn ControlPolicy,
    policy: &dyn ControlPolicy,
    n_trajectories: usize,
    rng: &RngStream,
) -> Result<DeviationAccuracyReport> {
    let mut pairs = Vec::new();
    let mut means = Vec::with_capacity(n_trajectories);
    for i in 0..n_trajectories {
        let mut r = rng.derive(i);
        let mut s = target.reset(&mut r);
        let (mut sp, mut sa, mut k) = (0.0, 0.0, 0usize);
        for step in 0..target.max_episode_steps() {
            if target.is_terminal(&s) {
                break;
            }
            let a = policy.action(&s);
            let next = match target.step(&s, &a, &mut r) {
                Ok(n) => n,
                Err(PadaError::DynamicsDiverged) => break,
                Err(e) => return Err(e),
            };
            let predicted = predict(&s, &a)?.iter().map(|v| v * v).sum::<f64>().sqrt();
            let source_pred = source_model.predict(&s, &source_policy.action(&s))?;
            let actual = next
                .iter()
                .zip(&source_pred)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            pairs.push(DeviationPair {
                trajectory: i,
                step,
                predicted,
                actual,
            });
            sp += predicted;
            sa += actual;
            k += 1;
            s = next;
        }
        if k > 0 {
            means.push((sp / k as f64, sa / k as f64));
        }
    }
    Ok(DeviationAccuracyReport {
        pairs,
        trajectory_means: means,
    })
}
