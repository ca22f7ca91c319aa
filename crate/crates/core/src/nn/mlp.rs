//! Feed-forward rectifier networks with an exact reverse-mode gradient.
//!
//! Parameters are `f64`, weights are stored `out × in` row-major, and batch
//! products go through `matrixmultiply::dgemm` (single-threaded and
//! deterministic).

use serde::{Deserialize, Serialize};

use crate::common::RngStream;
use crate::error::{PadaError, Result};

/// Hidden width used by every network in the toolkit.
pub const HIDDEN_WIDTH: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// `out_dim × in_dim`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    fn n_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }
}

/// Fixed affine input standardization `(x − mean) / std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Normalizer {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Column statistics of row-major `data` with `dim` columns. Columns
    /// with (near) zero spread get unit scale.
    pub fn fit(data: &[f64], dim: usize) -> Self {
        let n = (data.len() / dim).max(1) as f64;
        let mut mean = vec![0.0; dim];
        for row in data.chunks_exact(dim) {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x / n;
            }
        }
        let mut var = vec![0.0; dim];
        for row in data.chunks_exact(dim) {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m) / n;
            }
        }
        let std = var
            .into_iter()
            .map(|v| if v.sqrt() > 1e-8 { v.sqrt() } else { 1.0 })
            .collect();
        Self { mean, std }
    }

    /// Stacks two normalizers for a concatenated input.
    pub fn concat(&self, other: &Normalizer) -> Self {
        Self {
            mean: self.mean.iter().chain(&other.mean).copied().collect(),
            std: self.std.iter().chain(&other.std).copied().collect(),
        }
    }

    /// The first `dim` coordinates.
    pub fn prefix(&self, dim: usize) -> Self {
        Self {
            mean: self.mean[..dim].to_vec(),
            std: self.std[..dim].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn apply(&self, x: &mut [f64]) {
        let d = self.mean.len();
        for row in x.chunks_exact_mut(d) {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
    }
}

/// A rectifier MLP: ReLU on hidden layers, identity on the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    input_norm: Normalizer,
}

/// Parameter-shaped gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub layers: Vec<Layer>,
}

impl MlpGradients {
    /// All entries flattened in parameter order (per layer: weights, bias).
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.flatten().iter().all(|g| *g == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    /// `(1/|B|) Σ_i ‖net(x_i) − t_i‖²`.
    Mse,
}

/// Row-major inputs and targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Minibatch {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub len: usize,
}

impl Minibatch {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(PadaError::InsufficientData { needed: 1, got: 0 });
        }
        if !inputs.len().is_multiple_of(len) || !targets.len().is_multiple_of(len) {
            return Err(PadaError::DimensionMismatch {
                expected: len,
                actual: inputs.len().min(targets.len()),
            });
        }
        Ok(Self {
            inputs,
            targets,
            len,
        })
    }

    pub fn from_rows(inputs: &[Vec<f64>], targets: &[Vec<f64>]) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(PadaError::DimensionMismatch {
                expected: inputs.len(),
                actual: targets.len(),
            });
        }
        Self::new(inputs.concat(), targets.concat(), inputs.len())
    }
}

fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    (rsa, csa): (isize, isize),
    b: &[f64],
    (rsb, csb): (isize, isize),
    c: &mut [f64],
) {
    debug_assert!(c.len() >= m * n);
    // SAFETY: the slices cover the strided extents described by the
    // dimensions and strides at every call site below; `c` is row-major
    // `m × n` and does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

impl Mlp {
    /// Uniform init in `±1/√fan_in` for weights and biases.
    pub fn new(widths: &[usize], rng: &mut RngStream) -> Self {
        assert!(widths.len() >= 2, "need at least input and output widths");
        let layers = widths
            .windows(2)
            .map(|w| {
                let bound = 1.0 / (w[0] as f64).sqrt();
                let mut l = Layer::zeros(w[0], w[1]);
                for p in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                    *p = rng.uniform_range(-bound, bound);
                }
                l
            })
            .collect();
        Self {
            layers,
            input_norm: Normalizer::identity(widths[0]),
        }
    }

    /// `[input, 128, 128, output]`.
    pub fn standard(input_dim: usize, output_dim: usize, rng: &mut RngStream) -> Self {
        Self::new(&[input_dim, HIDDEN_WIDTH, HIDDEN_WIDTH, output_dim], rng)
    }

    pub fn zeros(widths: &[usize]) -> Self {
        assert!(widths.len() >= 2);
        Self {
            layers: widths.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
            input_norm: Normalizer::identity(widths[0]),
        }
    }

    pub fn from_layers(layers: Vec<Layer>, input_norm: Normalizer) -> Result<Self> {
        if layers.is_empty() {
            return Err(PadaError::InvalidConfig("network has no layers".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim != pair[1].in_dim {
                return Err(PadaError::DimensionMismatch {
                    expected: pair[0].out_dim,
                    actual: pair[1].in_dim,
                });
            }
        }
        for l in &layers {
            if l.weights.len() != l.in_dim * l.out_dim || l.bias.len() != l.out_dim {
                return Err(PadaError::DimensionMismatch {
                    expected: l.in_dim * l.out_dim + l.out_dim,
                    actual: l.weights.len() + l.bias.len(),
                });
            }
        }
        if input_norm.dim() != layers[0].in_dim {
            return Err(PadaError::DimensionMismatch {
                expected: layers[0].in_dim,
                actual: input_norm.dim(),
            });
        }
        Ok(Self { layers, input_norm })
    }

    pub fn with_input_norm(mut self, norm: Normalizer) -> Self {
        assert_eq!(norm.dim(), self.input_dim(), "normalizer width");
        self.input_norm = norm;
        self
    }

    pub fn input_norm(&self) -> &Normalizer {
        &self.input_norm
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").out_dim
    }

    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(|l| l.out_dim))
            .collect()
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Layer::n_params).sum()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    /// Mutable access to parameter `i` in [`Mlp::params_flat`] order.
    pub fn param_mut(&mut self, mut i: usize) -> &mut f64 {
        for l in &mut self.layers {
            if i < l.weights.len() {
                return &mut l.weights[i];
            }
            i -= l.weights.len();
            if i < l.bias.len() {
                return &mut l.bias[i];
            }
            i -= l.bias.len();
        }
        panic!("parameter index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.bias).all(|p| p.is_finite()))
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(PadaError::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.len(),
            });
        }
        Ok(self.forward_batch(x, 1))
    }

    /// Forward pass on `n` row-major inputs. Panics on a shape mismatch.
    pub fn forward_batch(&self, inputs: &[f64], n: usize) -> Vec<f64> {
        let mut acts = self.activations(inputs, n);
        acts.pop().expect("output layer")
    }

    /// Layer outputs, starting with the normalized input.
    fn activations(&self, inputs: &[f64], n: usize) -> Vec<Vec<f64>> {
        assert_eq!(inputs.len(), n * self.input_dim(), "input shape");
        let mut h = inputs.to_vec();
        self.input_norm.apply(&mut h);
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(h);
        let last = self.layers.len() - 1;
        for (li, l) in self.layers.iter().enumerate() {
            let prev = acts.last().expect("input");
            let mut out = vec![0.0; n * l.out_dim];
            gemm(
                n,
                l.in_dim,
                l.out_dim,
                prev,
                (l.in_dim as isize, 1),
                &l.weights,
                (1, l.in_dim as isize),
                &mut out,
            );
            for row in out.chunks_exact_mut(l.out_dim) {
                for (v, b) in row.iter_mut().zip(&l.bias) {
                    *v += b;
                    if li < last && *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            acts.push(out);
        }
        acts
    }

    /// Mean squared error on a batch.
    pub fn loss(&self, batch: &Minibatch, _loss: Loss) -> f64 {
        let y = self.forward_batch(&batch.inputs, batch.len);
        y.iter()
            .zip(&batch.targets)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / batch.len as f64
    }
}

/// Exact gradient of the batch loss; returns the loss alongside.
pub fn grad(net: &Mlp, batch: &Minibatch, _loss: Loss) -> Result<(f64, MlpGradients)> {
    let n = batch.len;
    if batch.inputs.len() != n * net.input_dim() {
        return Err(PadaError::DimensionMismatch {
            expected: n * net.input_dim(),
            actual: batch.inputs.len(),
        });
    }
    if batch.targets.len() != n * net.output_dim() {
        return Err(PadaError::DimensionMismatch {
            expected: n * net.output_dim(),
            actual: batch.targets.len(),
        });
    }
    let acts = net.activations(&batch.inputs, n);
    let y = acts.last().expect("output");
    let scale = 2.0 / n as f64;
    let mut loss = 0.0;
    let mut delta: Vec<f64> = y
        .iter()
        .zip(&batch.targets)
        .map(|(a, b)| {
            loss += (a - b) * (a - b);
            scale * (a - b)
        })
        .collect();
    loss /= n as f64;

    let mut grads: Vec<Layer> = net
        .layers
        .iter()
        .map(|l| Layer::zeros(l.in_dim, l.out_dim))
        .collect();
    for li in (0..net.layers.len()).rev() {
        let l = &net.layers[li];
        let input = &acts[li];
        let g = &mut grads[li];
        // dW = δᵀ · input  (out × in)
        gemm(
            l.out_dim,
            n,
            l.in_dim,
            &delta,
            (1, l.out_dim as isize),
            input,
            (l.in_dim as isize, 1),
            &mut g.weights,
        );
        for row in delta.chunks_exact(l.out_dim) {
            for (b, d) in g.bias.iter_mut().zip(row) {
                *b += d;
            }
        }
        if li > 0 {
            // δ_prev = (δ · W) ⊙ 1[h > 0]
            let mut prev = vec![0.0; n * l.in_dim];
            gemm(
                n,
                l.out_dim,
                l.in_dim,
                &delta,
                (l.out_dim as isize, 1),
                &l.weights,
                (l.in_dim as isize, 1),
                &mut prev,
            );
            for (p, h) in prev.iter_mut().zip(input) {
                if *h <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
    }
    Ok((loss, MlpGradients { layers: grads }))
}
