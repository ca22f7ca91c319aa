use crate::adapt::buffer::{ReplayBuffer, TransitionTriple};
use crate::common::RngStream;
use crate::error::{PadaError, Result};
use crate::nn::{grad, sgd_step, Loss, Minibatch, Mlp, Normalizer, SgdSchedule};

/// `δ_θ(s, a)`, trained so that `f̂(s, π_s(s)) + δ_θ(s, a) ≈ s′`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviationModel {
    pub net: Mlp,
}

impl DeviationModel {
    /// `[s, a] → 128 → 128 → s`, with the shared input normalization.
    pub fn new(state_dim: usize, action_dim: usize, input_norm: Normalizer, rng: &mut RngStream) -> Self {
        Self {
            net: Mlp::standard(state_dim + action_dim, state_dim, rng).with_input_norm(input_norm),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.net.output_dim()
    }

    pub fn predict(&self, s: &[f64], a: &[f64]) -> Result<Vec<f64>> {
        let x: Vec<f64> = s.iter().chain(a).copied().collect();
        self.net.forward(&x)
    }
}

/// Training rows: inputs `[s, a]`, targets `s′ − source_pred` (plus optional
/// Gaussian target noise).
pub fn deviation_batch(
    triples: &[&TransitionTriple],
    target_noise_std: f64,
    rng: &mut RngStream,
) -> Result<Minibatch> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for t in triples {
        x.extend_from_slice(&t.s);
        x.extend_from_slice(&t.a);
        for v in t.deviation_target() {
            y.push(if target_noise_std > 0.0 {
                v + target_noise_std * rng.normal()
            } else {
                v
            });
        }
    }
    Minibatch::new(x, y, triples.len())
}

/// One SGD step on a uniform minibatch; returns the pre-step batch loss.
pub fn deviation_training_step(
    model: &mut DeviationModel,
    buffer: &ReplayBuffer,
    batch_size: usize,
    schedule: &SgdSchedule,
    t: u64,
    rng: &mut RngStream,
) -> Result<f64> {
    deviation_training_step_noisy(model, buffer, batch_size, schedule, t, 0.0, rng)
}

pub fn deviation_training_step_noisy(
    model: &mut DeviationModel,
    buffer: &ReplayBuffer,
    batch_size: usize,
    schedule: &SgdSchedule,
    t: u64,
    target_noise_std: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    if buffer.is_empty() {
        return Err(PadaError::EmptyBuffer);
    }
    let idx = buffer.sample_indices(batch_size, rng)?;
    let rows: Vec<&TransitionTriple> = idx.iter().map(|&i| &buffer.as_slice()[i]).collect();
    let batch = deviation_batch(&rows, target_noise_std, rng)?;
    let (loss, g) = grad(&model.net, &batch, Loss::Mse)?;
    if !loss.is_finite() {
        return Err(PadaError::TrainingDiverged { step: t });
    }
    sgd_step(&mut model.net, &g, schedule, t);
    Ok(loss)
}

/// Residual objective on the whole buffer.
pub fn deviation_objective(model: &DeviationModel, buffer: &ReplayBuffer) -> Result<f64> {
    if buffer.is_empty() {
        return Err(PadaError::EmptyBuffer);
    }
    let rows: Vec<&TransitionTriple> = buffer.iter().collect();
    let batch = deviation_batch(&rows, 0.0, &mut RngStream::new(0, "unused"))?;
    Ok(model.net.loss(&batch, Loss::Mse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;

    fn buffer_of(n: usize, rng: &mut RngStream) -> ReplayBuffer {
        let mut b = ReplayBuffer::new();
        // Dyadic values keep every residual exact in floating point.
        let dyadic = |rng: &mut RngStream| (rng.index(33) as f64 - 16.0) / 8.0;
        for _ in 0..n {
            let s: Vec<f64> = (0..3).map(|_| dyadic(rng)).collect();
            let a = vec![dyadic(rng) / 2.0];
            let pred: Vec<f64> = s.iter().map(|v| 0.5 * v).collect();
            let next: Vec<f64> = pred.iter().map(|v| v + 0.25 * a[0]).collect();
            b.push(TransitionTriple {
                s,
                a,
                s_next: next,
                source_pred: pred,
                explored: false,
            })
            .unwrap();
        }
        b
    }

    #[test]
    fn exact_model_has_zero_gradient() {
        // δ(s, a) = a/4 on every coordinate, as a single linear layer
        let layer = Layer {
            in_dim: 4,
            out_dim: 3,
            weights: vec![0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25],
            bias: vec![0.0; 3],
        };
        let mut model = DeviationModel {
            net: Mlp::from_layers(vec![layer], Normalizer::identity(4)).unwrap(),
        };
        let mut rng = RngStream::new(0, "dev");
        let buf = buffer_of(50, &mut rng);
        let before = model.clone();
        let loss =
            deviation_training_step(&mut model, &buf, 16, &SgdSchedule::constant(0.1), 0, &mut rng).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(model, before);
    }

    #[test]
    fn overfits_one_sample() {
        let mut rng = RngStream::new(1, "dev");
        let buf = buffer_of(1, &mut rng);
        let mut model = DeviationModel::new(3, 1, Normalizer::identity(4), &mut rng);
        let sched = SgdSchedule::linear(5e-3, 3000);
        let mut prev = f64::INFINITY;
        let mut last = 0.0;
        for t in 0..3000 {
            last = deviation_training_step(&mut model, &buf, 8, &sched, t, &mut rng).unwrap();
            assert!(last <= prev + 1e-15, "step {t}: {last} > {prev}");
            prev = last;
        }
        assert!(deviation_objective(&model, &buf).unwrap() < 1e-6, "{last}");
    }

    #[test]
    fn empty_buffer_is_an_error() {
        let mut rng = RngStream::new(2, "dev");
        let mut model = DeviationModel::new(3, 1, Normalizer::identity(4), &mut rng);
        let r = deviation_training_step(&mut model, &ReplayBuffer::new(), 8, &SgdSchedule::constant(0.1), 0, &mut rng);
        assert_eq!(r, Err(PadaError::EmptyBuffer));
    }
}
