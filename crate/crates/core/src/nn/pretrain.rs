//! Source dynamics model `f̂(s, a) = s + net([s, a])`, fit by MSE on
//! transitions collected in the identity-config environment.

use serde::{Deserialize, Serialize};

use crate::common::RngStream;
use crate::envs::{ContinuousEnv, Transition};
use crate::error::{PadaError, Result};
use crate::nn::mlp::{grad, Loss, Minibatch, Mlp, Normalizer};
use crate::nn::sgd::{sgd_step, SgdSchedule};

pub const MIN_PRETRAIN_TRIPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PretrainConfig {
    pub steps: u64,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Trailing fraction of the triples kept out of training.
    pub holdout_fraction: f64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            steps: 20_000,
            batch_size: 64,
            learning_rate: 5e-3,
            holdout_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceModel {
    /// The exact noise-free source step; `input_norm` is what the
    /// downstream networks use.
    Exact {
        env: ContinuousEnv,
        input_norm: Normalizer,
    },
    /// Residual network over `[s, a]`.
    Learned(Mlp),
}

impl SourceModel {
    pub fn predict(&self, s: &[f64], a: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Exact { env, .. } => env.step_mean(s, a),
            Self::Learned(net) => {
                let x: Vec<f64> = s.iter().chain(a).copied().collect();
                let d = net.forward(&x)?;
                Ok(s.iter().zip(d).map(|(a, b)| a + b).collect())
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact { .. })
    }

    /// Normalization of `[s, a]` inputs shared by every network.
    pub fn input_norm(&self) -> &Normalizer {
        match self {
            Self::Exact { input_norm, .. } => input_norm,
            Self::Learned(net) => net.input_norm(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PretrainStats {
    pub n_train: usize,
    pub n_heldout: usize,
    pub final_train_mse: f64,
    pub heldout_mse: f64,
}

fn rows(triples: &[&Transition]) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for t in triples {
        x.extend_from_slice(&t.s);
        x.extend_from_slice(&t.a);
        y.extend(t.s_next.iter().zip(&t.s).map(|(n, s)| n - s));
    }
    (x, y)
}

/// Mean over samples of `‖f̂(s, a) − s′‖²`.
pub fn one_step_mse(model: &SourceModel, data: &[Transition]) -> Result<f64> {
    if data.is_empty() {
        return Err(PadaError::InsufficientData { needed: 1, got: 0 });
    }
    let mut total = 0.0;
    for t in data {
        let p = model.predict(&t.s, &t.a)?;
        total += p.iter().zip(&t.s_next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total / data.len() as f64)
}

/// Input statistics over `[s, a]` rows of `triples`.
pub fn fit_normalizer(triples: &[Transition]) -> Normalizer {
    let refs: Vec<&Transition> = triples.iter().collect();
    let (x, _) = rows(&refs);
    let dim = triples.first().map_or(1, |t| t.s.len() + t.a.len());
    Normalizer::fit(&x, dim)
}

pub fn pretrain_source_model(
    triples: &[Transition],
    cfg: &PretrainConfig,
    rng: &mut RngStream,
) -> Result<(SourceModel, PretrainStats)> {
    if triples.len() < MIN_PRETRAIN_TRIPLES {
        return Err(PadaError::InsufficientData {
            needed: MIN_PRETRAIN_TRIPLES,
            got: triples.len(),
        });
    }
    let n_heldout = ((triples.len() as f64) * cfg.holdout_fraction).floor() as usize;
    let (train, heldout) = triples.split_at(triples.len() - n_heldout);
    let sd = train[0].s.len();
    let ad = train[0].a.len();
    let norm = fit_normalizer(train);
    let mut init_rng = rng.derive("init");
    let mut net = Mlp::standard(sd + ad, sd, &mut init_rng).with_input_norm(norm);
    let schedule = SgdSchedule::linear(cfg.learning_rate, cfg.steps);
    let mut batch_rng = rng.derive("batches");
    let mut last = f64::NAN;
    let mut picked: Vec<&Transition> = Vec::with_capacity(cfg.batch_size);
    for t in 0..cfg.steps {
        picked.clear();
        for _ in 0..cfg.batch_size {
            picked.push(&train[batch_rng.index(train.len())]);
        }
        let (x, y) = rows(&picked);
        let batch = Minibatch::new(x, y, picked.len())?;
        let (loss, g) = grad(&net, &batch, Loss::Mse)?;
        if !loss.is_finite() {
            return Err(PadaError::TrainingDiverged { step: t });
        }
        sgd_step(&mut net, &g, &schedule, t);
        last = loss;
    }
    if !net.is_finite() {
        return Err(PadaError::TrainingDiverged { step: cfg.steps });
    }
    let model = SourceModel::Learned(net);
    let heldout_mse = if heldout.is_empty() {
        f64::NAN
    } else {
        one_step_mse(&model, heldout)?
    };
    Ok((
        model,
        PretrainStats {
            n_train: train.len(),
            n_heldout,
            final_train_mse: last,
            heldout_mse,
        },
    ))
}
