use crate::common::RngStream;
use crate::envs::ControlPolicy;
use crate::error::{PadaError, Result};
use crate::nn::{grad, sgd_step, Loss, Minibatch, Mlp, Normalizer, SgdSchedule};
use crate::planner::ActionBox;

/// A network policy whose output is clipped into the action box.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpPolicy {
    pub net: Mlp,
    pub bounds: ActionBox,
}

impl MlpPolicy {
    pub fn new(state_norm: Normalizer, bounds: ActionBox, rng: &mut RngStream) -> Self {
        let net = Mlp::standard(state_norm.dim(), bounds.dim(), rng).with_input_norm(state_norm);
        Self { net, bounds }
    }
}

impl ControlPolicy for MlpPolicy {
    fn action(&self, state: &[f64]) -> Vec<f64> {
        let mut a = self.net.forward(state).expect("state width matches the policy input");
        self.bounds.clip(&mut a);
        a
    }
}

/// Row-major supervised pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegressionData {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl RegressionData {
    pub fn push(&mut self, x: Vec<f64>, y: Vec<f64>) {
        self.inputs.push(x);
        self.targets.push(y);
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Minibatch MSE regression, in place. Returns the last batch loss.
pub fn fit_regression(
    net: &mut Mlp,
    data: &RegressionData,
    steps: u64,
    batch_size: usize,
    schedule: &SgdSchedule,
    rng: &mut RngStream,
) -> Result<f64> {
    if data.is_empty() {
        return Err(PadaError::InsufficientData { needed: 1, got: 0 });
    }
    let mut last = f64::NAN;
    for t in 0..steps {
        let mut x = Vec::with_capacity(batch_size * net.input_dim());
        let mut y = Vec::with_capacity(batch_size * net.output_dim());
        for _ in 0..batch_size {
            let i = rng.index(data.len());
            x.extend_from_slice(&data.inputs[i]);
            y.extend_from_slice(&data.targets[i]);
        }
        let batch = Minibatch::new(x, y, batch_size)?;
        let (loss, g) = grad(net, &batch, Loss::Mse)?;
        sgd_step(net, &g, schedule, t);
        if !loss.is_finite() {
            return Err(PadaError::TrainingDiverged { step: t });
        }
        last = loss;
    }
    Ok(last)
}

/// Mean squared error of `net` over all pairs.
pub fn regression_mse(net: &Mlp, data: &RegressionData) -> Result<f64> {
    if data.is_empty() {
        return Err(PadaError::InsufficientData { needed: 1, got: 0 });
    }
    let batch = Minibatch::from_rows(&data.inputs, &data.targets)?;
    Ok(net.loss(&batch, Loss::Mse))
}
