//! Perturbable continuous-control environments and their scripted source
//! controllers.

pub mod continuous;
pub mod controllers;
pub mod perturbation;

pub use continuous::{pendulum_energy, upright_error, ContinuousEnv, EnvKind, EnvSpec, DT};
pub use controllers::{scripted_source_policy, ControlPolicy, ScriptedController, ZeroPolicy};
pub use perturbation::PerturbationConfig;

use crate::common::{episodic_return, rollout, Environment, RngStream, Trajectory};
use crate::error::Result;

/// Median identity-config return of each scripted controller over the
/// evaluation episodes `reference/episode-{0..20}` at seed 0.
pub fn reference_return(kind: EnvKind) -> f64 {
    match kind {
        EnvKind::Pendulum => 152.270642415085,
        EnvKind::PointMass => 74.89763874517054,
        EnvKind::CartpoleLite => 199.98407952040563,
    }
}

/// Source (identity config) and target environments over the same spec.
pub fn make_pair(spec: &EnvSpec, target_config: PerturbationConfig) -> Result<(ContinuousEnv, ContinuousEnv)> {
    Ok((
        ContinuousEnv::new(spec.clone(), PerturbationConfig::identity())?,
        ContinuousEnv::new(spec.clone(), target_config)?,
    ))
}

/// One `(s, a, s′)` record.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub s_next: Vec<f64>,
}

/// Full-length episode under a deterministic policy.
pub fn run_episode(
    env: &ContinuousEnv,
    policy: &dyn ControlPolicy,
    rng: &mut RngStream,
) -> Result<Trajectory<Vec<f64>, Vec<f64>>> {
    let mut act = |s: &Vec<f64>| policy.action(s);
    rollout(env, &mut act, env.max_episode_steps(), rng)
}

/// Returns of `n` episodes; episode `i` draws from `(seed, "{label}/episode-{i}")`.
pub fn evaluate_returns(
    env: &ContinuousEnv,
    policy: &dyn ControlPolicy,
    n: usize,
    seed: u64,
    label: &str,
) -> Result<Vec<f64>> {
    (0..n)
        .map(|i| {
            let mut rng = RngStream::new(seed, format!("{label}/episode-{i}"));
            run_episode(env, policy, &mut rng).map(|t| episodic_return(&t))
        })
        .collect()
}

/// Rolls the policy with Gaussian action jitter until `n` transitions are
/// collected.
pub fn collect_transitions(
    env: &ContinuousEnv,
    policy: &dyn ControlPolicy,
    n: usize,
    jitter_std: f64,
    rng: &mut RngStream,
) -> Result<Vec<Transition>> {
    let bounds = &env.spec().action_bounds;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut s = env.reset(rng);
        for _ in 0..env.max_episode_steps() {
            if out.len() == n || env.is_terminal(&s) {
                break;
            }
            let mut a = policy.action(&s);
            for v in a.iter_mut() {
                *v += jitter_std * rng.normal();
            }
            bounds.clip(&mut a);
            let s_next = env.step(&s, &a, rng)?;
            out.push(Transition {
                s: s.clone(),
                a,
                s_next: s_next.clone(),
            });
            s = s_next;
        }
    }
    Ok(out)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
