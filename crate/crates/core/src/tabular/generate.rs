//! Random instance families used by the tests, the acceptance suite and the
//! `tabular` CLI command.

use serde::{Deserialize, Serialize};

use crate::common::RngStream;
use crate::tabular::exact::MarkovChain;
use crate::tabular::mdp::{TabularMdp, TabularPolicy};

/// Flat Dirichlet(1, …, 1) draw.
pub fn random_simplex(n: usize, rng: &mut RngStream) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Dense random MDP with Dirichlet rows and rewards in `[0, 1/H]`.
pub fn random_mdp(n_states: usize, n_actions: usize, horizon: usize, rng: &mut RngStream) -> TabularMdp {
    let mut transitions = Vec::with_capacity(n_states * n_actions * n_states);
    for _ in 0..n_states * n_actions {
        transitions.extend(random_simplex(n_states, rng));
    }
    let rewards = (0..n_states).map(|_| rng.uniform() / horizon as f64).collect();
    let initial = random_simplex(n_states, rng);
    TabularMdp::new(n_states, n_actions, horizon, rewards, initial, transitions)
        .expect("generated mdp is valid")
}

pub fn random_policy(n_states: usize, n_actions: usize, rng: &mut RngStream) -> TabularPolicy {
    TabularPolicy::new((0..n_states).map(|_| rng.index(n_actions)).collect())
}

/// Two dense random chains over `n` states sharing one start distribution.
pub fn random_chain_pair(n: usize, rng: &mut RngStream) -> (MarkovChain, MarkovChain) {
    let initial = random_simplex(n, rng);
    let mut chain = || MarkovChain {
        initial: initial.clone(),
        transitions: (0..n).map(|_| random_simplex(n, rng)).collect(),
    };
    let a = chain();
    (a, chain())
}

/// Uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.index(i + 1);
        p.swap(i, j);
    }
    p
}

/// Target whose action `σ(a)` reproduces source action `a` exactly.
/// Returns the target and `σ`.
pub fn permuted_target(source: &TabularMdp, rng: &mut RngStream) -> (TabularMdp, Vec<usize>) {
    let sigma = random_permutation(source.n_actions(), rng);
    (permute_actions(source, &sigma), sigma)
}

/// Relabels actions so that target action `sigma[a]` behaves like source `a`.
pub fn permute_actions(source: &TabularMdp, sigma: &[usize]) -> TabularMdp {
    let (n, na) = (source.n_states(), source.n_actions());
    let mut t = vec![0.0; n * na * n];
    for s in 0..n {
        for a in 0..na {
            let off = (s * na + sigma[a]) * n;
            t[off..off + n].copy_from_slice(source.next_dist(s, a));
        }
    }
    source.with_dynamics(na, t).expect("permutation preserves validity")
}

/// Permuted target with every row mixed toward uniform by `beta`, so that
/// each `ε_{s,a} ≤ β`.
pub fn mixed_target(source: &TabularMdp, beta: f64, rng: &mut RngStream) -> (TabularMdp, Vec<usize>) {
    let (permuted, sigma) = permuted_target(source, rng);
    let n = source.n_states();
    let mixed: Vec<f64> = permuted
        .transitions_flat()
        .iter()
        .map(|p| (1.0 - beta) * p + beta / n as f64)
        .collect();
    (
        source.with_dynamics(source.n_actions(), mixed).expect("mixing preserves validity"),
        sigma,
    )
}

/// Source MDP whose actions at each state are close to one another: row
/// `(s,a)` is `(1-κ)·b_s + κ·r_{s,a}` for a shared base row `b_s`.
/// Telling the actions apart takes many samples.
pub fn near_duplicate_mdp(
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    kappa: f64,
    rng: &mut RngStream,
) -> TabularMdp {
    let base = random_mdp(n_states, n_actions, horizon, rng);
    let mut t = Vec::with_capacity(n_states * n_actions * n_states);
    for _ in 0..n_states {
        let b = random_simplex(n_states, rng);
        for _ in 0..n_actions {
            let r = random_simplex(n_states, rng);
            t.extend(b.iter().zip(&r).map(|(x, y)| (1.0 - kappa) * x + kappa * y));
        }
    }
    base.with_dynamics(n_actions, t).expect("mixture rows are valid")
}

/// A source/target pair plus the source policy.
#[derive(Debug, Clone)]
pub struct TabularInstance {
    pub source: TabularMdp,
    pub target: TabularMdp,
    pub source_policy: TabularPolicy,
}

/// Built-in instance families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InstanceFamily {
    /// Target = source with permuted action labels (`ε = 0`).
    PermutedActions,
    /// Permuted target mixed toward uniform by `beta`.
    Mixed { beta: f64 },
    /// Permuted target over near-duplicate actions.
    NearDuplicate { kappa: f64 },
    /// Independent random source and target.
    Random,
}

pub fn generate_instance(
    family: InstanceFamily,
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    rng: &mut RngStream,
) -> TabularInstance {
    let source = match family {
        InstanceFamily::NearDuplicate { kappa } => {
            near_duplicate_mdp(n_states, n_actions, horizon, kappa, rng)
        }
        _ => random_mdp(n_states, n_actions, horizon, rng),
    };
    let source_policy = random_policy(n_states, n_actions, rng);
    let target = match family {
        InstanceFamily::PermutedActions | InstanceFamily::NearDuplicate { .. } => {
            permuted_target(&source, rng).0
        }
        InstanceFamily::Mixed { beta } => mixed_target(&source, beta, rng).0,
        InstanceFamily::Random => {
            let t = random_mdp(n_states, n_actions, horizon, rng);
            source
                .with_dynamics(n_actions, t.transitions_flat().to_vec())
                .expect("valid")
        }
    };
    TabularInstance {
        source,
        target,
        source_policy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_is_bijective() {
        let mut rng = RngStream::new(2, "perm");
        let mut p = random_permutation(7, &mut rng);
        p.sort();
        assert_eq!(p, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn family_serde_shape() {
        let f: InstanceFamily = serde_json::from_str(r#"{"kind":"mixed","beta":0.1}"#).unwrap();
        assert_eq!(f, InstanceFamily::Mixed { beta: 0.1 });
        let p: InstanceFamily = serde_json::from_str(r#"{"kind":"permuted-actions"}"#).unwrap();
        assert_eq!(p, InstanceFamily::PermutedActions);
    }
}
