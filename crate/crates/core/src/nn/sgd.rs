use serde::{Deserialize, Serialize};

use crate::nn::mlp::{Mlp, MlpGradients};

/// Plain SGD rate, optionally decayed linearly to zero over `total_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdSchedule {
    pub base_lr: f64,
    pub total_steps: u64,
    #[serde(default = "default_true")]
    pub linear_decay: bool,
    /// Rescale the whole gradient to at most this Euclidean norm.
    #[serde(default)]
    pub max_grad_norm: Option<f64>,
}

fn default_true() -> bool {
    true
}

/// Adaptation-model learning rate.
pub const ADAPT_LR: f64 = 5e-3;

impl SgdSchedule {
    pub fn linear(base_lr: f64, total_steps: u64) -> Self {
        Self {
            base_lr,
            total_steps,
            linear_decay: true,
            max_grad_norm: None,
        }
    }

    pub fn constant(base_lr: f64) -> Self {
        Self {
            base_lr,
            total_steps: u64::MAX,
            linear_decay: false,
            max_grad_norm: None,
        }
    }

    pub fn with_max_grad_norm(mut self, c: Option<f64>) -> Self {
        self.max_grad_norm = c;
        self
    }

    /// `η·max(0, 1 − t/total)`.
    pub fn rate(&self, t: u64) -> f64 {
        if !self.linear_decay {
            return self.base_lr;
        }
        if self.total_steps == 0 {
            return 0.0;
        }
        self.base_lr * (1.0 - t as f64 / self.total_steps as f64).max(0.0)
    }
}

/// `θ ← θ − η_t·g`, in place, with `g` clipped by global norm when the
/// schedule asks for it.
pub fn sgd_step(net: &mut Mlp, grads: &MlpGradients, schedule: &SgdSchedule, t: u64) {
    let mut lr = schedule.rate(t);
    if lr == 0.0 {
        return;
    }
    if let Some(c) = schedule.max_grad_norm {
        let norm = grads.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias)).map(|g| g * g).sum::<f64>().sqrt();
        if norm > c {
            lr *= c / norm;
        }
    }
    assert_eq!(net.layers().len(), grads.layers.len(), "gradient shape");
    for (l, g) in net.layers_mut().iter_mut().zip(&grads.layers) {
        assert_eq!(l.weights.len(), g.weights.len(), "gradient shape");
        for (w, d) in l.weights.iter_mut().zip(&g.weights) {
            *w -= lr * d;
        }
        for (b, d) in l.bias.iter_mut().zip(&g.bias) {
            *b -= lr * d;
        }
    }
}

/// `target ← (1−τ)·target + τ·fresh`.
pub fn polyak_blend(target: &mut Mlp, fresh: &Mlp, tau: f64) {
    assert_eq!(target.widths(), fresh.widths(), "network shapes differ");
    for (t, f) in target.layers_mut().iter_mut().zip(fresh.layers()) {
        for (a, b) in t.weights.iter_mut().zip(&f.weights) {
            *a = if tau == 1.0 { *b } else { (1.0 - tau) * *a + tau * b };
        }
        for (a, b) in t.bias.iter_mut().zip(&f.bias) {
            *a = if tau == 1.0 { *b } else { (1.0 - tau) * *a + tau * b };
        }
    }
}
