//! Exact dynamic-programming and enumeration oracles on finite MDPs.

use serde::{Deserialize, Serialize};

use crate::common::prob::{tv_distance_slices, MASS_TOLERANCE};
use crate::common::DiscreteDistribution;
use crate::error::{PadaError, Result};
use crate::tabular::mdp::{TabularMdp, TabularPolicy};

/// Largest `n_states^H` the trajectory enumerator accepts.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Per-step state distributions of a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDistributions {
    /// `per_step[h]` is the law of `s_h` for `h = 0..=H`; `per_step[0]` is
    /// the initial distribution.
    pub per_step: Vec<DiscreteDistribution>,
    /// Mean over the decision steps `h = 0..H-1`, i.e. the states at which
    /// the policy acts.
    pub average: DiscreteDistribution,
}

fn push_forward(mdp: &TabularMdp, policy: &TabularPolicy, d: &[f64]) -> Vec<f64> {
    let n = mdp.n_states();
    let mut next = vec![0.0; n];
    for (s, &mass) in d.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for (sp, p) in mdp.next_dist(s, policy.action(s)).iter().enumerate() {
            next[sp] += mass * p;
        }
    }
    next
}

pub fn exact_state_distribution(
    mdp: &TabularMdp,
    policy: &TabularPolicy,
) -> Result<StateDistributions> {
    policy.check_for(mdp)?;
    let h = mdp.horizon();
    let mut per_step = Vec::with_capacity(h + 1);
    let mut d = mdp.initial().to_vec();
    let mut avg = vec![0.0; mdp.n_states()];
    for step in 0..=h {
        if step < h {
            for (a, x) in avg.iter_mut().zip(&d) {
                *a += x / h as f64;
            }
        }
        let next = if step < h {
            Some(push_forward(mdp, policy, &d))
        } else {
            None
        };
        per_step.push(DiscreteDistribution::new(std::mem::take(&mut d))?);
        if let Some(n) = next {
            d = n;
        }
    }
    Ok(StateDistributions {
        per_step,
        average: DiscreteDistribution::new(avg)?,
    })
}

/// Decision-state average `d_π` as a raw vector.
pub(crate) fn decision_distribution(mdp: &TabularMdp, policy: &TabularPolicy) -> Vec<f64> {
    let h = mdp.horizon();
    let mut d = mdp.initial().to_vec();
    let mut avg = vec![0.0; mdp.n_states()];
    for _ in 0..h {
        for (a, x) in avg.iter_mut().zip(&d) {
            *a += x / h as f64;
        }
        d = push_forward(mdp, policy, &d);
    }
    avg
}

fn check_enumerable(n_states: usize, horizon: usize) -> Result<usize> {
    let too_large = PadaError::TooLargeToEnumerate {
        n_states,
        horizon,
        limit: ENUMERATION_LIMIT,
    };
    let count = (n_states as u64)
        .checked_pow(horizon as u32)
        .ok_or(too_large.clone())?;
    if count > ENUMERATION_LIMIT {
        return Err(too_large);
    }
    Ok(count as usize)
}

/// Masses of every `(s_1, …, s_H)` sequence, indexed lexicographically
/// (`s_1` most significant), for a chain started from `initial` at `s_0`.
fn enumerate_chain<'a>(
    n_states: usize,
    horizon: usize,
    initial: &[f64],
    next: impl Fn(usize) -> &'a [f64],
) -> Result<Vec<f64>> {
    check_enumerable(n_states, horizon)?;
    let mut probs = vec![0.0; n_states];
    for (s0, &m) in initial.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        for (s1, p) in next(s0).iter().enumerate() {
            probs[s1] += m * p;
        }
    }
    for _ in 1..horizon {
        let mut extended = Vec::with_capacity(probs.len() * n_states);
        for (idx, &m) in probs.iter().enumerate() {
            let last = idx % n_states;
            let row = next(last);
            extended.extend(row.iter().map(|p| m * p));
        }
        probs = extended;
    }
    Ok(probs)
}

/// Law of the state sequence `(s_1, …, s_H)` under `policy`.
///
/// Outcome `i` encodes the sequence in base `n_states`, `s_1` most
/// significant.
pub fn exact_trajectory_distribution(
    mdp: &TabularMdp,
    policy: &TabularPolicy,
) -> Result<DiscreteDistribution> {
    policy.check_for(mdp)?;
    let probs = enumerate_chain(mdp.n_states(), mdp.horizon(), mdp.initial(), |s| {
        mdp.next_dist(s, policy.action(s))
    })?;
    DiscreteDistribution::new(probs)
}

/// Decodes an outcome index of [`exact_trajectory_distribution`].
pub fn decode_trajectory(index: usize, n_states: usize, horizon: usize) -> Vec<usize> {
    let mut seq = vec![0; horizon];
    let mut rest = index;
    for slot in seq.iter_mut().rev() {
        *slot = rest % n_states;
        rest /= n_states;
    }
    seq
}

/// TV between the trajectory laws of `(mdp_a, policy_a)` and `(mdp_b, policy_b)`.
pub fn trajectory_gap(
    mdp_a: &TabularMdp,
    policy_a: &TabularPolicy,
    mdp_b: &TabularMdp,
    policy_b: &TabularPolicy,
) -> Result<f64> {
    mdp_a.same_state_space(mdp_b)?;
    let a = exact_trajectory_distribution(mdp_a, policy_a)?;
    let b = exact_trajectory_distribution(mdp_b, policy_b)?;
    tv_distance_slices(a.probs(), b.probs())
}

/// `ε_{s,a}` for every state and source action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptabilityReport {
    /// `eps[s][a] = min_{a'} TV(f_source(·|s,a), f_target(·|s,a'))`.
    pub eps: Vec<Vec<f64>>,
    /// Lowest-index target action attaining each minimum.
    pub argmin_actions: Vec<Vec<usize>>,
}

impl AdaptabilityReport {
    /// `E_{s∼d}[ε_{s, π(s)}]`.
    pub fn expected_eps(&self, d: &[f64], source_policy: &TabularPolicy) -> f64 {
        d.iter()
            .enumerate()
            .map(|(s, m)| m * self.eps[s][source_policy.action(s)])
            .sum()
    }
}

pub fn adaptability_report(
    source: &TabularMdp,
    source_policy: &TabularPolicy,
    target: &TabularMdp,
) -> Result<AdaptabilityReport> {
    source.same_state_space(target)?;
    source_policy.check_for(source)?;
    let mut eps = Vec::with_capacity(source.n_states());
    let mut argmin_actions = Vec::with_capacity(source.n_states());
    for s in 0..source.n_states() {
        let mut row_eps = Vec::with_capacity(source.n_actions());
        let mut row_arg = Vec::with_capacity(source.n_actions());
        for a in 0..source.n_actions() {
            let src = source.next_dist(s, a);
            let mut best = (f64::INFINITY, 0);
            for at in 0..target.n_actions() {
                let d = tv_distance_slices(src, target.next_dist(s, at))?;
                if d < best.0 {
                    best = (d, at);
                }
            }
            row_eps.push(best.0);
            row_arg.push(best.1);
        }
        eps.push(row_eps);
        argmin_actions.push(row_arg);
    }
    Ok(AdaptabilityReport {
        eps,
        argmin_actions,
    })
}

/// A finite Markov chain with its start distribution at `s_0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovChain {
    pub initial: Vec<f64>,
    /// Row-stochastic `transitions[s][s']`.
    pub transitions: Vec<Vec<f64>>,
}

impl MarkovChain {
    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    /// The chain induced by running `policy` in `mdp`.
    pub fn from_policy(mdp: &TabularMdp, policy: &TabularPolicy) -> Self {
        Self {
            initial: mdp.initial().to_vec(),
            transitions: (0..mdp.n_states())
                .map(|s| mdp.next_dist(s, policy.action(s)).to_vec())
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_states();
        DiscreteDistribution::new(self.initial.clone())?;
        if self.transitions.len() != n {
            return Err(PadaError::DimensionMismatch {
                expected: n,
                actual: self.transitions.len(),
            });
        }
        for row in &self.transitions {
            if row.len() != n {
                return Err(PadaError::DimensionMismatch {
                    expected: n,
                    actual: row.len(),
                });
            }
            DiscreteDistribution::new(row.clone())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceCheck {
    /// `‖ρ_{p1} − ρ_{p2}‖` by enumeration.
    pub lhs: f64,
    /// `Σ_{h=0}^{H-1} E_{s∼d_{p1;h}} ‖p1(·|s) − p2(·|s)‖`.
    pub rhs: f64,
    pub holds: bool,
}

/// Checks the step-wise trajectory divergence bound for two chains that
/// share a start distribution.
pub fn verify_divergence_lemma(
    p1: &MarkovChain,
    p2: &MarkovChain,
    horizon: usize,
) -> Result<DivergenceCheck> {
    p1.validate()?;
    p2.validate()?;
    let n = p1.n_states();
    if p2.n_states() != n {
        return Err(PadaError::DimensionMismatch {
            expected: n,
            actual: p2.n_states(),
        });
    }
    if tv_distance_slices(&p1.initial, &p2.initial)? > MASS_TOLERANCE {
        return Err(PadaError::InvalidConfig(
            "chains must share the start distribution".into(),
        ));
    }
    let rho1 = enumerate_chain(n, horizon, &p1.initial, |s| &p1.transitions[s])?;
    let rho2 = enumerate_chain(n, horizon, &p1.initial, |s| &p2.transitions[s])?;
    let lhs = tv_distance_slices(&rho1, &rho2)?;

    let step_tv: Vec<f64> = (0..n)
        .map(|s| tv_distance_slices(&p1.transitions[s], &p2.transitions[s]))
        .collect::<Result<_>>()?;
    let mut d = p1.initial.clone();
    let mut rhs = 0.0;
    for _ in 0..horizon {
        rhs += d.iter().zip(&step_tv).map(|(m, t)| m * t).sum::<f64>();
        let mut next = vec![0.0; n];
        for (s, &m) in d.iter().enumerate() {
            for (sp, p) in p1.transitions[s].iter().enumerate() {
                next[sp] += m * p;
            }
        }
        d = next;
    }
    Ok(DivergenceCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}
