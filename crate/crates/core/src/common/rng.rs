//! Named, reproducible random streams.
//!
//! A stream is identified by `(seed, label)`. The ChaCha key is the SHA-256
//! digest of the seed bytes and the label, so two consumers with different
//! labels never share draws, and adding a consumer never shifts another's
//! sequence.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    label: String,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: impl Into<String>) -> Self {
        let label = label.into();
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(label.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        Self {
            seed,
            label,
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// A child stream keyed by `"{label}/{suffix}"` on the same seed.
    pub fn derive(&self, suffix: impl std::fmt::Display) -> Self {
        Self::new(self.seed, format!("{}/{}", self.label, suffix))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Draw an outcome index from a probability vector by inversion.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        // Rounding leaves `acc` slightly below 1; fall back to the last
        // outcome with positive mass.
        probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
