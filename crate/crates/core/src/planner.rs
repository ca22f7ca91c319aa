//! One-step Cross-Entropy-Method action selection.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::common::RngStream;
use crate::envs::ControlPolicy;
use crate::error::{PadaError, Result};
use crate::nn::Mlp;

/// Axis-aligned action bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionBox {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl ActionBox {
    pub fn new(low: Vec<f64>, high: Vec<f64>) -> Result<Self> {
        if low.len() != high.len() {
            return Err(PadaError::DimensionMismatch {
                expected: low.len(),
                actual: high.len(),
            });
        }
        for (dim, (l, h)) in low.iter().zip(&high).enumerate() {
            if !(l < h) {
                return Err(PadaError::DegenerateBox {
                    dim,
                    low: *l,
                    high: *h,
                });
            }
        }
        Ok(Self { low, high })
    }

    /// `[-1, 1]^dim`.
    pub fn symmetric(dim: usize) -> Self {
        Self::new(vec![-1.0; dim], vec![1.0; dim]).expect("unit box")
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.low.clone(), self.high.clone()).map(|_| ())
    }

    pub fn contains(&self, a: &[f64]) -> bool {
        a.len() == self.dim()
            && a
                .iter()
                .zip(self.low.iter().zip(&self.high))
                .all(|(x, (l, h))| l <= x && x <= h)
    }

    pub fn clip(&self, a: &mut [f64]) {
        for (x, (l, h)) in a.iter_mut().zip(self.low.iter().zip(&self.high)) {
            *x = x.clamp(*l, *h);
        }
    }

    pub fn clipped(&self, a: &[f64]) -> Vec<f64> {
        let mut v = a.to_vec();
        self.clip(&mut v);
        v
    }

    pub fn sample_uniform(&self, rng: &mut RngStream) -> Vec<f64> {
        self.low
            .iter()
            .zip(&self.high)
            .map(|(l, h)| rng.uniform_range(*l, *h))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMode {
    Full,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CemConfig {
    #[serde(rename = "cem_iterations")]
    pub iterations: usize,
    #[serde(rename = "cem_population")]
    pub population: usize,
    #[serde(rename = "cem_elites")]
    pub elites: usize,
    #[serde(rename = "cem_sigma0")]
    pub sigma0: f64,
    #[serde(rename = "cem_cov_reg")]
    pub cov_reg: f64,
    #[serde(rename = "cem_cov_mode")]
    pub cov_mode: CovarianceMode,
}

impl Default for CemConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            population: 200,
            elites: 40,
            sigma0: 0.5,
            cov_reg: 1e-6,
            cov_mode: CovarianceMode::Full,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.population == 0 || self.elites == 0 {
            return Err(PadaError::InvalidConfig(
                "cem iterations, population and elites must be positive".into(),
            ));
        }
        if self.elites > self.population {
            return Err(PadaError::InvalidConfig(format!(
                "cem_elites ({}) exceeds cem_population ({})",
                self.elites, self.population
            )));
        }
        if !(self.sigma0 > 0.0) || !(self.cov_reg >= 0.0) {
            return Err(PadaError::InvalidConfig(
                "cem_sigma0 must be positive and the regularizer nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Lower-triangular sampling factor of `cov`.
fn sampling_factor(cov: &DMatrix<f64>, mode: CovarianceMode) -> DMatrix<f64> {
    match mode {
        CovarianceMode::Diagonal => DMatrix::from_diagonal(&cov.diagonal().map(|v| v.max(0.0).sqrt())),
        CovarianceMode::Full => match cov.clone().cholesky() {
            Some(c) => c.l(),
            // numerically indefinite refit: fall back to the diagonal
            None => DMatrix::from_diagonal(&cov.diagonal().map(|v| v.max(0.0).sqrt())),
        },
    }
}

/// Minimizes a batch objective over `bounds`. `objective` receives the
/// population as a row-major `N × d` slice and returns `N` scores.
///
/// Each round samples `N` Gaussian candidates, clips them into the box,
/// keeps the `K` lowest (ties by sample index) and refits mean and
/// covariance on them. Returns the final mean, clipped.
pub fn cem_minimize_batch<F>(
    mut objective: F,
    bounds: &ActionBox,
    init_mean: &[f64],
    cfg: &CemConfig,
    rng: &mut RngStream,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    bounds.validate()?;
    cfg.validate()?;
    let d = bounds.dim();
    if init_mean.len() != d {
        return Err(PadaError::DimensionMismatch {
            expected: d,
            actual: init_mean.len(),
        });
    }
    let (n, k) = (cfg.population, cfg.elites);
    let mut mean = DVector::from_vec(bounds.clipped(init_mean));
    let mut cov = DMatrix::<f64>::identity(d, d) * (cfg.sigma0 * cfg.sigma0);
    let mut samples = vec![0.0; n * d];
    let mut z = DVector::<f64>::zeros(d);
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for _ in 0..cfg.iterations {
        let factor = sampling_factor(&cov, cfg.cov_mode);
        for row in samples.chunks_exact_mut(d) {
            for zi in z.iter_mut() {
                *zi = rng.normal();
            }
            let x = &mean + &factor * &z;
            row.copy_from_slice(x.as_slice());
            bounds.clip(row);
        }
        let scores = objective(&samples);
        assert_eq!(scores.len(), n, "objective must score every candidate");
        order.clear();
        order.extend(0..n);
        order.sort_by(|&i, &j| {
            let (a, b) = (scores[i], scores[j]);
            let a = if a.is_nan() { f64::INFINITY } else { a };
            let b = if b.is_nan() { f64::INFINITY } else { b };
            a.total_cmp(&b).then(i.cmp(&j))
        });
        let elites = &order[..k];
        mean.fill(0.0);
        for &i in elites {
            for (m, x) in mean.iter_mut().zip(&samples[i * d..(i + 1) * d]) {
                *m += x / k as f64;
            }
        }
        cov.fill(0.0);
        for &i in elites {
            let row = &samples[i * d..(i + 1) * d];
            for r in 0..d {
                let dr = row[r] - mean[r];
                for c in 0..d {
                    cov[(r, c)] += dr * (row[c] - mean[c]) / k as f64;
                }
            }
        }
        if cfg.cov_mode == CovarianceMode::Diagonal {
            cov = DMatrix::from_diagonal(&cov.diagonal());
        }
        for i in 0..d {
            cov[(i, i)] += cfg.cov_reg;
        }
    }
    let mut out: Vec<f64> = mean.iter().copied().collect();
    bounds.clip(&mut out);
    Ok(out)
}

/// [`cem_minimize_batch`] with a per-action objective.
pub fn cem_minimize<F>(
    mut objective: F,
    bounds: &ActionBox,
    init_mean: &[f64],
    cfg: &CemConfig,
    rng: &mut RngStream,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    let d = bounds.dim().max(1);
    cem_minimize_batch(
        |pop: &[f64]| pop.chunks_exact(d).map(&mut objective).collect(),
        bounds,
        init_mean,
        cfg,
        rng,
    )
}

/// `‖δ(state, a)‖²` for every candidate `a` in a row-major population.
pub fn deviation_norms(deviation: &Mlp, state: &[f64], population: &[f64], action_dim: usize) -> Vec<f64> {
    let n = population.len() / action_dim;
    let in_dim = state.len() + action_dim;
    let mut inputs = Vec::with_capacity(n * in_dim);
    for a in population.chunks_exact(action_dim) {
        inputs.extend_from_slice(state);
        inputs.extend_from_slice(a);
    }
    let out = deviation.forward_batch(&inputs, n);
    out.chunks_exact(deviation.output_dim())
        .map(|r| r.iter().map(|v| v * v).sum())
        .collect()
}

/// CEM minimizer of `a ↦ ‖δ(state, a)‖²`, warm-started at the target
/// policy's action when one is given and at the source policy's otherwise.
pub fn plan_action(
    state: &[f64],
    deviation: &Mlp,
    source_policy: &dyn ControlPolicy,
    target_policy: Option<&dyn ControlPolicy>,
    bounds: &ActionBox,
    cfg: &CemConfig,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    let d = bounds.dim();
    if deviation.input_dim() != state.len() + d {
        return Err(PadaError::DimensionMismatch {
            expected: state.len() + d,
            actual: deviation.input_dim(),
        });
    }
    let init = match target_policy {
        Some(p) => p.action(state),
        None => source_policy.action(state),
    };
    cem_minimize_batch(
        |pop| deviation_norms(deviation, state, pop, d),
        bounds,
        &init,
        cfg,
        rng,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_argmin(f: impl Fn(f64) -> f64) -> f64 {
        (0..=20_000)
            .map(|i| -1.0 + i as f64 * 1e-4)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    }

    #[test]
    fn degenerate_box_rejected() {
        assert!(matches!(
            ActionBox::new(vec![0.0, 1.0], vec![1.0, 1.0]),
            Err(PadaError::DegenerateBox { dim: 1, .. })
        ));
    }

    #[test]
    fn interior_quadratic() {
        let b = ActionBox::symmetric(1);
        let mut rng = RngStream::new(0, "cem");
        let f = |a: f64| (a - 0.3) * (a - 0.3);
        let a = cem_minimize(|x| f(x[0]), &b, &[0.0], &CemConfig::default(), &mut rng).unwrap();
        assert!((a[0] - grid_argmin(f)).abs() < 1e-2);
    }

    #[test]
    fn minimum_outside_box_lands_on_boundary() {
        let b = ActionBox::symmetric(1);
        let mut rng = RngStream::new(1, "cem");
        let f = |a: f64| (a - 1.5) * (a - 1.5);
        let a = cem_minimize(|x| f(x[0]), &b, &[0.0], &CemConfig::default(), &mut rng).unwrap();
        assert!((a[0] - grid_argmin(f)).abs() < 1e-2);
        assert!((a[0] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn constant_objective_stays_feasible() {
        let b = ActionBox::new(vec![-1.0, -0.5], vec![1.0, 0.5]).unwrap();
        let mut rng = RngStream::new(2, "cem");
        let a = cem_minimize(|_| 7.0, &b, &[0.9, 0.4], &CemConfig::default(), &mut rng).unwrap();
        assert!(b.contains(&a));
    }

    #[test]
    fn init_mean_is_clipped() {
        let b = ActionBox::symmetric(1);
        let mut rng = RngStream::new(3, "cem");
        let cfg = CemConfig {
            iterations: 1,
            ..CemConfig::default()
        };
        let a = cem_minimize(|x| x[0].abs(), &b, &[5.0], &cfg, &mut rng).unwrap();
        assert!(b.contains(&a));
    }

    #[test]
    fn scale_invariance_is_bitwise() {
        let b = ActionBox::symmetric(2);
        let f = |x: &[f64]| (x[0] - 0.2).powi(2) + 3.0 * (x[1] + 0.4).powi(2);
        let a1 = cem_minimize(f, &b, &[0.0, 0.0], &CemConfig::default(), &mut RngStream::new(4, "cem")).unwrap();
        let a2 = cem_minimize(|x| 17.5 * f(x), &b, &[0.0, 0.0], &CemConfig::default(), &mut RngStream::new(4, "cem"))
            .unwrap();
        assert_eq!(a1, a2);
    }

    #[test]
    fn tiny_sigma_concentrates() {
        let b = ActionBox::symmetric(2);
        let cfg = CemConfig {
            sigma0: 1e-3,
            ..CemConfig::default()
        };
        let m = [0.25, -0.6];
        let a = cem_minimize(
            |x| (x[0] - m[0]).powi(2) + (x[1] - m[1]).powi(2),
            &b,
            &m,
            &cfg,
            &mut RngStream::new(5, "cem"),
        )
        .unwrap();
        for (x, c) in a.iter().zip(&m) {
            assert!((x - c).abs() <= 3e-3);
        }
    }

    #[test]
    fn elites_above_population_rejected() {
        let cfg = CemConfig {
            elites: 300,
            ..CemConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_keys() {
        let cfg: CemConfig = serde_json::from_str(r#"{"cem_iterations":3,"cem_cov_mode":"diagonal"}"#).unwrap();
        assert_eq!(cfg.iterations, 3);
        assert_eq!(cfg.population, 200);
        assert_eq!(cfg.cov_mode, CovarianceMode::Diagonal);
    }
}
