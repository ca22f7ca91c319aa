use sha2::{Digest, Sha256};

use crate::common::RngStream;
use crate::error::{PadaError, Result};

/// One target-environment interaction plus the cached source prediction
/// `f̂(s, π_s(s))`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTriple {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub s_next: Vec<f64>,
    pub source_pred: Vec<f64>,
    /// The action was a uniform exploration draw rather than a plan.
    pub explored: bool,
}

impl TransitionTriple {
    /// `s′ − f̂(s, π_s(s))`.
    pub fn deviation_target(&self) -> Vec<f64> {
        self.s_next
            .iter()
            .zip(&self.source_pred)
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn actual_deviation(&self) -> f64 {
        self.deviation_target().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Append-only aggregated dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayBuffer {
    triples: Vec<TransitionTriple>,
}

impl ReplayBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: TransitionTriple) -> Result<()> {
        if let Some(first) = self.triples.first() {
            if t.s.len() != first.s.len()
                || t.a.len() != first.a.len()
                || t.s_next.len() != first.s.len()
                || t.source_pred.len() != first.s.len()
            {
                return Err(PadaError::DimensionMismatch {
                    expected: first.s.len(),
                    actual: t.s.len(),
                });
            }
        }
        self.triples.push(t);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn as_slice(&self) -> &[TransitionTriple] {
        &self.triples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TransitionTriple> {
        self.triples.iter()
    }

    /// `n` indices drawn uniformly with replacement.
    pub fn sample_indices(&self, n: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(PadaError::EmptyBuffer);
        }
        Ok((0..n).map(|_| rng.index(self.len())).collect())
    }

    /// SHA-256 over the bit patterns of the first `k` triples.
    pub fn prefix_hash(&self, k: usize) -> String {
        let mut h = Sha256::new();
        for t in &self.triples[..k.min(self.len())] {
            for v in t.s.iter().chain(&t.a).chain(&t.s_next).chain(&t.source_pred) {
                h.update(v.to_le_bytes());
            }
            h.update([t.explored as u8]);
        }
        hex::encode(h.finalize())
    }
}
