use crate::common::rng::RngStream;
use crate::error::{PadaError, Result};

/// An episodic environment with a state-only reward.
///
/// Stepping is a pure function of `(state, action, rng)`; an environment
/// value carries only its fixed dynamics parameters.
pub trait Environment {
    type State: Clone;
    type Action: Clone;

    fn reset(&self, rng: &mut RngStream) -> Self::State;

    fn step(
        &self,
        state: &Self::State,
        action: &Self::Action,
        rng: &mut RngStream,
    ) -> Result<Self::State>;

    fn reward(&self, state: &Self::State) -> f64;

    fn is_terminal(&self, _state: &Self::State) -> bool {
        false
    }

    /// Rejects actions outside the declared action space.
    fn check_action(&self, action: &Self::Action) -> Result<()>;

    fn max_episode_steps(&self) -> usize;
}

/// A map from states to actions. Planners keep their own random stream,
/// hence `&mut self`.
pub trait Policy<S, A> {
    fn act(&mut self, state: &S) -> A;
}

impl<S, A, F: FnMut(&S) -> A> Policy<S, A> for F {
    fn act(&mut self, state: &S) -> A {
        self(state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S, A> {
    /// `s_0 ..= s_H`.
    pub states: Vec<S>,
    pub actions: Vec<A>,
    /// `rewards[h] = R(states[h + 1])`.
    pub rewards: Vec<f64>,
    /// Set when the environment terminated before the requested horizon.
    pub truncated: bool,
}

impl<S, A> Trajectory<S, A> {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

pub fn rollout<E, P>(
    env: &E,
    policy: &mut P,
    horizon: usize,
    rng: &mut RngStream,
) -> Result<Trajectory<E::State, E::Action>>
where
    E: Environment,
    P: Policy<E::State, E::Action> + ?Sized,
{
    if horizon > env.max_episode_steps() {
        return Err(PadaError::InvalidConfig(format!(
            "horizon {horizon} exceeds episode limit {}",
            env.max_episode_steps()
        )));
    }
    let mut state = env.reset(rng);
    let mut traj = Trajectory {
        states: vec![state.clone()],
        actions: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        truncated: false,
    };
    for _ in 0..horizon {
        if env.is_terminal(&state) {
            traj.truncated = true;
            break;
        }
        let action = policy.act(&state);
        env.check_action(&action)?;
        state = env.step(&state, &action, rng)?;
        traj.rewards.push(env.reward(&state));
        traj.actions.push(action);
        traj.states.push(state.clone());
    }
    Ok(traj)
}

pub fn episodic_return<S, A>(traj: &Trajectory<S, A>) -> f64 {
    traj.rewards.iter().sum()
}
