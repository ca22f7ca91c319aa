//! Behavior cloning of the planner into a standalone target policy.

use serde::{Deserialize, Serialize};

use crate::adapt::buffer::ReplayBuffer;
use crate::adapt::policy::{fit_regression, MlpPolicy, RegressionData};
use crate::common::RngStream;
use crate::envs::{ContinuousEnv, ControlPolicy};
use crate::error::Result;
use crate::nn::{polyak_blend, Normalizer, SgdSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistillConfig {
    /// Environment steps between soft updates.
    pub period: u64,
    /// Most recent planner-labeled pairs used per fit.
    pub window: usize,
    /// Blend weight of the freshly fitted policy.
    pub polyak: f64,
    pub sgd_steps: u64,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Source-policy episodes used to initialize the target policy.
    pub init_episodes: usize,
    pub init_sgd_steps: u64,
}

impl Default for DistillConfig {
    fn default() -> Self {
        Self {
            period: 3000,
            window: 10_000,
            polyak: 0.05,
            sgd_steps: 1000,
            batch_size: 64,
            learning_rate: 5e-3,
            init_episodes: 20,
            init_sgd_steps: 4000,
        }
    }
}

/// The last `window` planner-labeled `(s, a)` pairs.
pub fn planner_pairs(buffer: &ReplayBuffer, window: usize) -> RegressionData {
    let mut picked: Vec<_> = buffer.iter().rev().filter(|t| !t.explored).take(window).collect();
    picked.reverse();
    let mut data = RegressionData::default();
    for t in picked {
        data.push(t.s.clone(), t.a.clone());
    }
    data
}

/// Fits a copy of `current` to recent planner actions and blends it in.
/// Without planner-labeled data this returns `current` unchanged.
pub fn distill_target_policy(
    buffer: &ReplayBuffer,
    current: &MlpPolicy,
    cfg: &DistillConfig,
    rng: &mut RngStream,
) -> Result<MlpPolicy> {
    let data = planner_pairs(buffer, cfg.window);
    if data.is_empty() {
        return Ok(current.clone());
    }
    let mut fresh = current.clone();
    let schedule = SgdSchedule::linear(cfg.learning_rate, cfg.sgd_steps);
    fit_regression(&mut fresh.net, &data, cfg.sgd_steps, cfg.batch_size, &schedule, rng)?;
    let mut out = current.clone();
    polyak_blend(&mut out.net, &fresh.net, cfg.polyak);
    Ok(out)
}

/// Network clone of the source controller on source-environment states.
pub fn clone_source_policy(
    source_env: &ContinuousEnv,
    source_policy: &dyn ControlPolicy,
    state_norm: Normalizer,
    cfg: &DistillConfig,
    rng: &mut RngStream,
) -> Result<MlpPolicy> {
    let mut data = RegressionData::default();
    let mut roll_rng = rng.derive("rollouts");
    for _ in 0..cfg.init_episodes {
        let traj = crate::envs::run_episode(source_env, source_policy, &mut roll_rng)?;
        for (s, a) in traj.states.iter().zip(&traj.actions) {
            data.push(s.clone(), a.clone());
        }
    }
    let mut policy = MlpPolicy::new(state_norm, source_env.spec().action_bounds.clone(), &mut rng.derive("init"));
    let schedule = SgdSchedule::linear(cfg.learning_rate, cfg.init_sgd_steps);
    fit_regression(
        &mut policy.net,
        &data,
        cfg.init_sgd_steps,
        cfg.batch_size,
        &schedule,
        &mut rng.derive("fit"),
    )?;
    Ok(policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::buffer::TransitionTriple;
    use crate::planner::ActionBox;

    fn buffer_with(a0: f64, explored_every: usize, rng: &mut RngStream) -> ReplayBuffer {
        let mut b = ReplayBuffer::new();
        for i in 0..500 {
            let s: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
            let explored = explored_every > 0 && i % explored_every == 0;
            b.push(TransitionTriple {
                s: s.clone(),
                a: vec![if explored { -0.9 } else { a0 }],
                s_next: s.clone(),
                source_pred: s,
                explored,
            })
            .unwrap();
        }
        b
    }

    #[test]
    fn constant_labels_are_reproduced() {
        let mut rng = RngStream::new(0, "distill");
        let buf = buffer_with(0.35, 7, &mut rng);
        let current = MlpPolicy::new(Normalizer::identity(3), ActionBox::symmetric(1), &mut rng);
        let cfg = DistillConfig {
            polyak: 1.0,
            sgd_steps: 3000,
            learning_rate: 0.1,
            ..DistillConfig::default()
        };
        let out = distill_target_policy(&buf, &current, &cfg, &mut rng).unwrap();
        let errs: Vec<f64> = buf.iter().filter(|t| !t.explored).map(|t| (out.action(&t.s)[0] - 0.35).abs()).collect();
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        // explored rows leaking in would pull the fit about 0.18 lower
        assert!(mean < 1e-2, "mean error {mean}");
    }

    #[test]
    fn polyak_one_equals_fresh_fit() {
        let mut rng = RngStream::new(1, "distill");
        let buf = buffer_with(0.1, 0, &mut rng);
        let current = MlpPolicy::new(Normalizer::identity(3), ActionBox::symmetric(1), &mut rng);
        let cfg = DistillConfig {
            polyak: 1.0,
            sgd_steps: 50,
            ..DistillConfig::default()
        };
        let out = distill_target_policy(&buf, &current, &cfg, &mut RngStream::new(9, "fit")).unwrap();
        let mut fresh = current.clone();
        fit_regression(
            &mut fresh.net,
            &planner_pairs(&buf, cfg.window),
            50,
            64,
            &SgdSchedule::linear(cfg.learning_rate, 50),
            &mut RngStream::new(9, "fit"),
        )
        .unwrap();
        assert_eq!(out, fresh);
    }

    #[test]
    fn no_planner_data_is_noop() {
        let mut rng = RngStream::new(2, "distill");
        let buf = buffer_with(0.1, 1, &mut rng);
        let current = MlpPolicy::new(Normalizer::identity(3), ActionBox::symmetric(1), &mut rng);
        let out = distill_target_policy(&buf, &current, &DistillConfig::default(), &mut rng).unwrap();
        assert_eq!(out, current);
    }
}
