use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::common::prob::MASS_TOLERANCE;
use crate::common::{Environment, Policy, RngStream};
use crate::error::{PadaError, Result};

/// A finite-horizon MDP with an explicit transition tensor.
///
/// Serialized as
/// `{"n_states", "n_actions", "horizon", "rewards", "initial", "transitions"}`
/// where `transitions[s][a]` is a next-state distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMdp", into = "RawMdp")]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    rewards: Vec<f64>,
    initial: Vec<f64>,
    /// Flat `[s][a][s']`.
    transitions: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMdp {
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    rewards: Vec<f64>,
    initial: Vec<f64>,
    transitions: Vec<Vec<Vec<f64>>>,
}

impl TryFrom<RawMdp> for TabularMdp {
    type Error = PadaError;
    fn try_from(raw: RawMdp) -> Result<Self> {
        if raw.transitions.len() != raw.n_states {
            return Err(PadaError::DimensionMismatch {
                expected: raw.n_states,
                actual: raw.transitions.len(),
            });
        }
        let mut flat = Vec::with_capacity(raw.n_states * raw.n_actions * raw.n_states);
        for row in &raw.transitions {
            if row.len() != raw.n_actions {
                return Err(PadaError::DimensionMismatch {
                    expected: raw.n_actions,
                    actual: row.len(),
                });
            }
            for dist in row {
                flat.extend_from_slice(dist);
            }
        }
        TabularMdp::new(
            raw.n_states,
            raw.n_actions,
            raw.horizon,
            raw.rewards,
            raw.initial,
            flat,
        )
    }
}

impl From<TabularMdp> for RawMdp {
    fn from(m: TabularMdp) -> Self {
        let transitions = (0..m.n_states)
            .map(|s| (0..m.n_actions).map(|a| m.next_dist(s, a).to_vec()).collect())
            .collect();
        RawMdp {
            n_states: m.n_states,
            n_actions: m.n_actions,
            horizon: m.horizon,
            rewards: m.rewards,
            initial: m.initial,
            transitions,
        }
    }
}

fn check_simplex(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(PadaError::InvalidDistribution(format!(
            "{what} has a negative or non-finite entry"
        )));
    }
    let total: f64 = v.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(PadaError::InvalidDistribution(format!(
            "{what} sums to {total}"
        )));
    }
    Ok(())
}

impl TabularMdp {
    /// `transitions` is flat `[s][a][s']`.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        horizon: usize,
        rewards: Vec<f64>,
        initial: Vec<f64>,
        transitions: Vec<f64>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 || horizon == 0 {
            return Err(PadaError::InvalidConfig(
                "n_states, n_actions and horizon must be positive".into(),
            ));
        }
        if rewards.len() != n_states {
            return Err(PadaError::DimensionMismatch {
                expected: n_states,
                actual: rewards.len(),
            });
        }
        if initial.len() != n_states {
            return Err(PadaError::DimensionMismatch {
                expected: n_states,
                actual: initial.len(),
            });
        }
        if transitions.len() != n_states * n_actions * n_states {
            return Err(PadaError::DimensionMismatch {
                expected: n_states * n_actions * n_states,
                actual: transitions.len(),
            });
        }
        check_simplex(&initial, "initial distribution")?;
        for s in 0..n_states {
            for a in 0..n_actions {
                let off = (s * n_actions + a) * n_states;
                check_simplex(&transitions[off..off + n_states], &format!("transitions[{s}][{a}]"))?;
            }
        }
        // Any state sequence of length H must score in [0, 1].
        let h = horizon as f64;
        for (s, &r) in rewards.iter().enumerate() {
            if !r.is_finite() || r < 0.0 || r * h > 1.0 + 1e-12 {
                return Err(PadaError::InvalidConfig(format!(
                    "reward {r} at state {s} breaks the [0, 1] return normalization"
                )));
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            horizon,
            rewards,
            initial,
            transitions,
        })
    }

    pub fn from_json_str(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| {
            PadaError::InvalidConfig(format!("{}: {e}", path.display()))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("mdp serializes")
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    /// `f(· | s, a)`.
    pub fn next_dist(&self, s: usize, a: usize) -> &[f64] {
        let off = (s * self.n_actions + a) * self.n_states;
        &self.transitions[off..off + self.n_states]
    }

    pub fn transitions_flat(&self) -> &[f64] {
        &self.transitions
    }

    /// Same states, rewards, horizon and initial distribution with new
    /// dynamics and action count.
    pub fn with_dynamics(&self, n_actions: usize, transitions: Vec<f64>) -> Result<Self> {
        Self::new(
            self.n_states,
            n_actions,
            self.horizon,
            self.rewards.clone(),
            self.initial.clone(),
            transitions,
        )
    }

    pub(crate) fn same_state_space(&self, other: &TabularMdp) -> Result<()> {
        if self.n_states != other.n_states {
            return Err(PadaError::DimensionMismatch {
                expected: self.n_states,
                actual: other.n_states,
            });
        }
        if self.horizon != other.horizon {
            return Err(PadaError::InvalidConfig(format!(
                "horizons differ: {} vs {}",
                self.horizon, other.horizon
            )));
        }
        Ok(())
    }
}

/// A deterministic policy `state -> action index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabularPolicy {
    pub actions: Vec<usize>,
}

impl TabularPolicy {
    pub fn new(actions: Vec<usize>) -> Self {
        Self { actions }
    }

    pub fn action(&self, s: usize) -> usize {
        self.actions[s]
    }

    pub fn check_for(&self, mdp: &TabularMdp) -> Result<()> {
        if self.actions.len() != mdp.n_states() {
            return Err(PadaError::DimensionMismatch {
                expected: mdp.n_states(),
                actual: self.actions.len(),
            });
        }
        if let Some((s, &a)) = self
            .actions
            .iter()
            .enumerate()
            .find(|(_, &a)| a >= mdp.n_actions())
        {
            return Err(PadaError::ActionOutOfSpace {
                dim: s,
                value: a as f64,
            });
        }
        Ok(())
    }
}

impl Policy<usize, usize> for TabularPolicy {
    fn act(&mut self, state: &usize) -> usize {
        self.actions[*state]
    }
}

/// Sampling view of a [`TabularMdp`].
impl Environment for TabularMdp {
    type State = usize;
    type Action = usize;

    fn reset(&self, rng: &mut RngStream) -> usize {
        rng.categorical(&self.initial)
    }

    fn step(&self, state: &usize, action: &usize, rng: &mut RngStream) -> Result<usize> {
        Ok(rng.categorical(self.next_dist(*state, *action)))
    }

    fn reward(&self, state: &usize) -> f64 {
        self.rewards[*state]
    }

    fn check_action(&self, action: &usize) -> Result<()> {
        if *action < self.n_actions {
            Ok(())
        } else {
            Err(PadaError::ActionOutOfSpace {
                dim: 0,
                value: *action as f64,
            })
        }
    }

    fn max_episode_steps(&self) -> usize {
        self.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_STATE: &str = r#"{
        "n_states": 2, "n_actions": 1, "horizon": 2,
        "rewards": [0.0, 0.5],
        "initial": [1.0, 0.0],
        "transitions": [[[0.0, 1.0]], [[1.0, 0.0]]]
    }"#;

    #[test]
    fn json_round_trip() {
        let mdp = TabularMdp::from_json_str(TWO_STATE).unwrap();
        assert_eq!(mdp.next_dist(0, 0), &[0.0, 1.0]);
        let again = TabularMdp::from_json_str(&mdp.to_json()).unwrap();
        assert_eq!(mdp, again);
    }

    #[test]
    fn json_rejects_bad_rows() {
        let bad = TWO_STATE.replace("[[0.0, 1.0]]", "[[0.2, 1.0]]");
        assert!(TabularMdp::from_json_str(&bad).is_err());
        let short = TWO_STATE.replace("\"rewards\": [0.0, 0.5]", "\"rewards\": [0.0]");
        assert!(TabularMdp::from_json_str(&short).is_err());
    }

    #[test]
    fn rewards_must_normalize() {
        let big = TWO_STATE.replace("[0.0, 0.5]", "[0.0, 0.6]");
        let err = TabularMdp::from_json_str(&big).unwrap_err();
        assert!(err.to_string().contains("normalization"));
    }

    #[test]
    fn normalized_return_in_unit_interval() {
        let mdp = TabularMdp::from_json_str(TWO_STATE).unwrap();
        let mut rng = RngStream::new(1, "mdp");
        let mut policy = TabularPolicy::new(vec![0, 0]);
        for _ in 0..20 {
            let traj = crate::common::rollout(&mdp, &mut policy, 2, &mut rng).unwrap();
            let ret = crate::common::episodic_return(&traj);
            assert!((0.0..=1.0).contains(&ret));
        }
    }
}
