use crate::common::prob::tv_distance_slices;
use crate::error::{PadaError, Result};
use crate::tabular::mdp::{TabularMdp, TabularPolicy};

/// Default pseudo-count added to every next-state cell.
pub const DEFAULT_SMOOTHING: f64 = 0.01;

/// Count-based dynamics model; its prediction is the smoothed empirical
/// conditional frequency, which is the maximum-likelihood row on the
/// aggregated data.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularDynamicsModel {
    n_states: usize,
    n_actions: usize,
    /// Flat `[s][a][s']` evidence.
    counts: Vec<f64>,
    smoothing: f64,
}

impl TabularDynamicsModel {
    /// No evidence: every row predicts uniform.
    pub fn new(n_states: usize, n_actions: usize, smoothing: f64) -> Self {
        assert!(smoothing >= 0.0, "smoothing must be nonnegative");
        Self {
            n_states,
            n_actions,
            counts: vec![0.0; n_states * n_actions * n_states],
            smoothing,
        }
    }

    /// Starts from `weight` pseudo-observations of `mdp`'s own rows.
    pub fn with_prior(mdp: &TabularMdp, weight: f64, smoothing: f64) -> Self {
        let mut m = Self::new(mdp.n_states(), mdp.n_actions(), smoothing);
        for (c, p) in m.counts.iter_mut().zip(mdp.transitions_flat()) {
            *c = weight * p;
        }
        m
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn counts(&self, s: usize, a: usize) -> &[f64] {
        let off = (s * self.n_actions + a) * self.n_states;
        &self.counts[off..off + self.n_states]
    }

    /// `(counts + α) / (row_sum + α·S)`, uniform for an empty unsmoothed row.
    pub fn predict(&self, s: usize, a: usize) -> Vec<f64> {
        let row = self.counts(s, a);
        let denom = row.iter().sum::<f64>() + self.smoothing * self.n_states as f64;
        if denom <= 0.0 {
            return vec![1.0 / self.n_states as f64; self.n_states];
        }
        row.iter().map(|c| (c + self.smoothing) / denom).collect()
    }

    /// Adds `weight · dist` to the `(s, a)` row.
    pub(crate) fn absorb(&mut self, s: usize, a: usize, weight: f64, dist: &[f64]) {
        let off = (s * self.n_actions + a) * self.n_states;
        for (c, p) in self.counts[off..off + self.n_states].iter_mut().zip(dist) {
            *c += weight * p;
        }
    }
}

/// Aggregates `(s, a, s')` triples into the model. Refitting on the whole
/// aggregated dataset is exactly follow-the-leader for the tabular class.
pub fn ftl_mle_update(
    mut model: TabularDynamicsModel,
    new_triples: &[(usize, usize, usize)],
) -> Result<TabularDynamicsModel> {
    for &(s, a, sp) in new_triples {
        if s >= model.n_states || sp >= model.n_states {
            return Err(PadaError::DimensionMismatch {
                expected: model.n_states,
                actual: s.max(sp) + 1,
            });
        }
        if a >= model.n_actions {
            return Err(PadaError::ActionOutOfSpace {
                dim: 0,
                value: a as f64,
            });
        }
        let off = (s * model.n_actions + a) * model.n_states + sp;
        model.counts[off] += 1.0;
    }
    Ok(model)
}

/// Greedy policy that at each state picks the target action whose
/// predicted next-state law is closest in TV to the source policy's.
/// Ties go to the lowest action index.
pub fn greedy_adapted_policy(
    model: &TabularDynamicsModel,
    source: &TabularMdp,
    source_policy: &TabularPolicy,
) -> Result<TabularPolicy> {
    greedy_policy_by(model, source, source_policy, |tv| tv)
}

/// [`greedy_adapted_policy`] with the TV objective passed through `score`.
/// Any strictly increasing `score` yields the same policy.
pub fn greedy_policy_by(
    model: &TabularDynamicsModel,
    source: &TabularMdp,
    source_policy: &TabularPolicy,
    score: impl Fn(f64) -> f64,
) -> Result<TabularPolicy> {
    if model.n_states != source.n_states() {
        return Err(PadaError::DimensionMismatch {
            expected: source.n_states(),
            actual: model.n_states,
        });
    }
    source_policy.check_for(source)?;
    let mut actions = Vec::with_capacity(model.n_states);
    for s in 0..model.n_states {
        let reference = source.next_dist(s, source_policy.action(s));
        let mut best = (f64::INFINITY, 0);
        for a in 0..model.n_actions {
            let v = score(tv_distance_slices(&model.predict(s, a), reference)?);
            if v < best.0 {
                best = (v, a);
            }
        }
        actions.push(best.1);
    }
    Ok(TabularPolicy::new(actions))
}
