use crate::common::RngStream;
use crate::error::Result;
use crate::nn::mlp::{grad, Loss, Minibatch, Mlp};

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub coords: Vec<usize>,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_rel_error: f64,
}

/// `|a − b| / max(|a|, |b|, 1e-8)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

/// Compares the backward pass with central differences of step `h` on
/// `n_coords` parameter coordinates drawn without replacement (all of them
/// when `n_coords` is at least the parameter count).
pub fn finite_difference_check(
    net: &Mlp,
    batch: &Minibatch,
    n_coords: usize,
    h: f64,
    rng: &mut RngStream,
) -> Result<GradCheck> {
    let (_, g) = grad(net, batch, Loss::Mse)?;
    let flat = g.flatten();
    let n = net.n_params();
    let coords: Vec<usize> = if n_coords >= n {
        (0..n).collect()
    } else {
        let mut picked = std::collections::BTreeSet::new();
        while picked.len() < n_coords {
            picked.insert(rng.index(n));
        }
        picked.into_iter().collect()
    };
    let mut probe = net.clone();
    let mut numeric = Vec::with_capacity(coords.len());
    for &i in &coords {
        let orig = *probe.param_mut(i);
        *probe.param_mut(i) = orig + h;
        let up = probe.loss(batch, Loss::Mse);
        *probe.param_mut(i) = orig - h;
        let down = probe.loss(batch, Loss::Mse);
        *probe.param_mut(i) = orig;
        numeric.push((up - down) / (2.0 * h));
    }
    let analytic: Vec<f64> = coords.iter().map(|&i| flat[i]).collect();
    let max_rel_error = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| relative_error(*a, *b))
        .fold(0.0, f64::max);
    Ok(GradCheck {
        coords,
        analytic,
        numeric,
        max_rel_error,
    })
}
