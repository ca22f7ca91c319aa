//! The data-aggregation loop shared by PADA-DM, its distilled variant, the
//! inverse-dynamics baseline and the source-only control.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adapt::buffer::{ReplayBuffer, TransitionTriple};
use crate::adapt::deviation::{deviation_training_step_noisy, DeviationModel};
use crate::adapt::distill::{clone_source_policy, distill_target_policy, DistillConfig};
use crate::adapt::policy::MlpPolicy;
use crate::common::{Environment, RngStream};
use crate::envs::{ContinuousEnv, ControlPolicy};
use crate::error::{PadaError, Result};
use crate::nn::{SgdSchedule, SourceModel, ADAPT_LR};
use crate::planner::{plan_action, CemConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptRunConfig {
    /// Total target-environment steps.
    pub budget: u64,
    /// Environment steps per outer iteration.
    pub steps_per_iteration: u64,
    /// Outer iterations; `budget / steps_per_iteration` when absent.
    pub iterations: Option<u64>,
    pub explore_prob: f64,
    /// SGD steps after each outer iteration; the number of new
    /// transitions when absent.
    pub sgd_steps_per_iteration: Option<u64>,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Global gradient-norm cap for the deviation and inverse-dynamics
    /// updates; plain SGD when absent.
    pub grad_clip: Option<f64>,
    /// Gaussian noise on deviation targets.
    pub target_noise_std: f64,
    pub distill: bool,
    pub distillation: DistillConfig,
    pub eval_interval: u64,
    pub eval_episodes: usize,
    /// Fill the `wall_time_s` column. Off by default so that logs are
    /// reproducible byte for byte.
    pub record_wall_time: bool,
}

impl Default for AdaptRunConfig {
    fn default() -> Self {
        Self {
            budget: 50_000,
            steps_per_iteration: 500,
            iterations: None,
            explore_prob: 0.01,
            sgd_steps_per_iteration: None,
            batch_size: 64,
            learning_rate: ADAPT_LR,
            grad_clip: None,
            target_noise_std: 0.0,
            distill: false,
            distillation: DistillConfig::default(),
            eval_interval: 1000,
            eval_episodes: 5,
            record_wall_time: false,
        }
    }
}

impl AdaptRunConfig {
    pub fn iterations(&self) -> u64 {
        self.iterations
            .unwrap_or(self.budget / self.steps_per_iteration.max(1))
    }

    pub fn sgd_steps_per_iteration(&self) -> u64 {
        self.sgd_steps_per_iteration.unwrap_or(self.steps_per_iteration)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PadaError::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.explore_prob) {
            return bad(format!("explore_prob must lie in [0, 1], got {}", self.explore_prob));
        }
        if self.steps_per_iteration == 0 || self.batch_size == 0 {
            return bad("steps_per_iteration and batch_size must be positive".into());
        }
        if self.iterations() * self.steps_per_iteration > self.budget {
            return bad(format!(
                "iterations × steps_per_iteration ({}) exceeds the budget ({})",
                self.iterations() * self.steps_per_iteration,
                self.budget
            ));
        }
        if self.eval_interval == 0 || !self.eval_interval.is_multiple_of(self.steps_per_iteration) {
            return bad("eval_interval must be a positive multiple of steps_per_iteration".into());
        }
        if self.eval_episodes == 0 {
            return bad("eval_episodes must be positive".into());
        }
        if !(self.learning_rate > 0.0) || !(self.target_noise_std >= 0.0) {
            return bad("learning_rate must be positive and target_noise_std nonnegative".into());
        }
        if self.grad_clip.is_some_and(|c| !(c > 0.0)) {
            return bad("grad_clip must be positive".into());
        }
        if self.distill && !(self.distillation.polyak > 0.0 && self.distillation.polyak <= 1.0) {
            return bad("distillation.polyak must lie in (0, 1]".into());
        }
        Ok(())
    }
}

/// One learning-curve row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub env_steps: u64,
    pub episodic_return_mean: f64,
    pub episodic_return_std: f64,
    pub deviation_mean: f64,
    pub explored_fraction: f64,
    pub buffer_size: usize,
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearningCurve {
    pub rows: Vec<CurveRow>,
}

impl LearningCurve {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| PadaError::Io(e.to_string()))?;
        for r in &self.rows {
            w.serialize(r).map_err(|e| PadaError::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| PadaError::Io(e.to_string()))?;
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<CurveRow>, _>>()
            .map_err(|e| PadaError::Io(e.to_string()))?;
        Ok(Self { rows })
    }

    pub fn last(&self) -> Option<&CurveRow> {
        self.rows.last()
    }

    /// First logged step count whose mean return reaches `threshold`.
    pub fn samples_to_threshold(&self, threshold: f64) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| r.episodic_return_mean >= threshold)
            .map(|r| r.env_steps)
    }
}

/// Returns and mean per-step deviation of evaluation episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalStats {
    pub returns: Vec<f64>,
    pub deviation_mean: f64,
}

impl EvalStats {
    pub fn mean_return(&self) -> f64 {
        self.returns.iter().sum::<f64>() / self.returns.len() as f64
    }

    /// Population standard deviation.
    pub fn std_return(&self) -> f64 {
        let m = self.mean_return();
        (self.returns.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / self.returns.len() as f64).sqrt()
    }
}

/// `‖s′ − f̂(s, π_s(s))‖`.
pub fn actual_deviation(
    source_model: &SourceModel,
    source_policy: &dyn ControlPolicy,
    s: &[f64],
    s_next: &[f64],
) -> Result<f64> {
    let pred = source_model.predict(s, &source_policy.action(s))?;
    Ok(pred.iter().zip(s_next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Runs `n` episodes of `actor` in `env`. Episode `i` resets from
/// `(seed, "eval/episode-{i}")`, so every evaluation with the same seed
/// starts from the same states. A diverging step ends its episode.
pub fn evaluate_actor(
    env: &ContinuousEnv,
    source_model: &SourceModel,
    source_policy: &dyn ControlPolicy,
    n: usize,
    seed: u64,
    actor: &mut dyn FnMut(&[f64], usize) -> Result<Vec<f64>>,
) -> Result<EvalStats> {
    let mut returns = Vec::with_capacity(n);
    let (mut dev_sum, mut dev_n) = (0.0, 0usize);
    for i in 0..n {
        let mut rng = RngStream::new(seed, format!("eval/episode-{i}"));
        let mut s = env.reset(&mut rng);
        let mut ret = 0.0;
        for _ in 0..env.max_episode_steps() {
            if env.is_terminal(&s) {
                break;
            }
            let a = actor(&s, i)?;
            env.check_action(&a)?;
            let next = match env.step(&s, &a, &mut rng) {
                Ok(n) => n,
                Err(PadaError::DynamicsDiverged) => break,
                Err(e) => return Err(e),
            };
            dev_sum += actual_deviation(source_model, source_policy, &s, &next)?;
            dev_n += 1;
            ret += env.reward(&next);
            s = next;
        }
        returns.push(ret);
    }
    Ok(EvalStats {
        returns,
        deviation_mean: if dev_n > 0 { dev_sum / dev_n as f64 } else { 0.0 },
    })
}

/// Source policy acting unchanged in `env`.
pub fn evaluate_source_policy(
    env: &ContinuousEnv,
    source_model: &SourceModel,
    source_policy: &dyn ControlPolicy,
    n: usize,
    seed: u64,
) -> Result<EvalStats> {
    evaluate_actor(env, source_model, source_policy, n, seed, &mut |s, _| {
        Ok(source_policy.action(s))
    })
}

/// Everything the loop needs besides the learner.
pub struct LoopContext<'a> {
    pub source: &'a ContinuousEnv,
    pub target: &'a ContinuousEnv,
    pub source_policy: &'a dyn ControlPolicy,
    pub source_model: &'a SourceModel,
    pub cfg: &'a AdaptRunConfig,
}

/// An adaptation method plugged into the shared loop.
pub trait Learner {
    /// Training-time action when not exploring.
    fn act(&mut self, ctx: &LoopContext<'_>, s: &[f64], rng: &mut RngStream) -> Result<Vec<f64>>;

    /// Evaluation-time action.
    fn eval_act(&self, ctx: &LoopContext<'_>, s: &[f64], rng: &mut RngStream) -> Result<Vec<f64>>;

    /// Called after each counted environment step.
    fn after_step(
        &mut self,
        _ctx: &LoopContext<'_>,
        _buffer: &ReplayBuffer,
        _env_steps: u64,
        _rng: &mut RngStream,
    ) -> Result<()> {
        Ok(())
    }

    /// Called after each outer iteration with the SGD step budget.
    fn update(
        &mut self,
        ctx: &LoopContext<'_>,
        buffer: &ReplayBuffer,
        steps: u64,
        rng: &mut RngStream,
    ) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutcome {
    pub curve: LearningCurve,
    pub buffer: ReplayBuffer,
    pub env_steps: u64,
    pub explored_steps: u64,
    pub diverged_steps: u64,
}

/// The shared loop: per step explore with probability ε or ask the
/// learner, step the target, append the triple with its cached source
/// prediction; after each iteration hand the learner its SGD budget; log
/// an evaluation every `eval_interval` steps (including step 0).
pub fn run_loop(ctx: &LoopContext<'_>, learner: &mut dyn Learner, rng: &RngStream) -> Result<LoopOutcome> {
    run_loop_logged(ctx, learner, rng, &mut |_| Ok(()))
}

/// [`run_loop`], handing each curve row to `sink` as soon as it is logged
/// so that a failing run leaves its earlier rows behind.
pub fn run_loop_logged(
    ctx: &LoopContext<'_>,
    learner: &mut dyn Learner,
    rng: &RngStream,
    sink: &mut dyn FnMut(&CurveRow) -> Result<()>,
) -> Result<LoopOutcome> {
    let cfg = ctx.cfg;
    cfg.validate()?;
    let bounds = ctx.target.spec().action_bounds.clone();
    let mut collect_rng = rng.derive("collect");
    let mut act_rng = rng.derive("act");
    let mut train_rng = rng.derive("train");
    let mut hook_rng = rng.derive("hook");
    let start = Instant::now();
    let mut buffer = ReplayBuffer::new();
    let mut curve = LearningCurve::default();
    let (mut env_steps, mut explored_steps, mut diverged_steps) = (0u64, 0u64, 0u64);

    let mut log = |env_steps: u64, explored: u64, buffer: &ReplayBuffer, learner: &dyn Learner| -> Result<()> {
        let stats = evaluate_actor(
            ctx.target,
            ctx.source_model,
            ctx.source_policy,
            cfg.eval_episodes,
            rng.seed(),
            &mut |s, i| learner.eval_act(ctx, s, &mut rng.derive(format!("eval-act/{env_steps}/{i}"))),
        )?;
        curve.rows.push(CurveRow {
            env_steps,
            episodic_return_mean: stats.mean_return(),
            episodic_return_std: stats.std_return(),
            deviation_mean: stats.deviation_mean,
            explored_fraction: if env_steps == 0 {
                0.0
            } else {
                explored as f64 / env_steps as f64
            },
            buffer_size: buffer.len(),
            wall_time_s: cfg.record_wall_time.then(|| start.elapsed().as_secs_f64()),
        });
        sink(curve.rows.last().expect("just pushed"))
    };

    log(0, 0, &buffer, learner)?;
    let mut state = ctx.target.reset(&mut collect_rng);
    let mut episode_steps = 0usize;
    for _ in 0..cfg.iterations() {
        for _ in 0..cfg.steps_per_iteration {
            if episode_steps == ctx.target.max_episode_steps() || ctx.target.is_terminal(&state) {
                state = ctx.target.reset(&mut collect_rng);
                episode_steps = 0;
            }
            let explored = collect_rng.uniform() < cfg.explore_prob;
            let action = if explored {
                bounds.sample_uniform(&mut collect_rng)
            } else {
                learner.act(ctx, &state, &mut act_rng)?
            };
            ctx.target.check_action(&action)?;
            let source_pred = ctx
                .source_model
                .predict(&state, &ctx.source_policy.action(&state))?;
            env_steps += 1;
            explored_steps += explored as u64;
            match ctx.target.step(&state, &action, &mut collect_rng) {
                Ok(next) => {
                    buffer.push(TransitionTriple {
                        s: state,
                        a: action,
                        s_next: next.clone(),
                        source_pred,
                        explored,
                    })?;
                    state = next;
                    episode_steps += 1;
                }
                Err(PadaError::DynamicsDiverged) => {
                    diverged_steps += 1;
                    state = ctx.target.reset(&mut collect_rng);
                    episode_steps = 0;
                }
                Err(e) => return Err(e),
            }
            learner.after_step(ctx, &buffer, env_steps, &mut hook_rng)?;
        }
        if !buffer.is_empty() {
            learner.update(ctx, &buffer, cfg.sgd_steps_per_iteration(), &mut train_rng)?;
        }
        if env_steps % cfg.eval_interval == 0 {
            log(env_steps, explored_steps, &buffer, learner)?;
        }
    }
    Ok(LoopOutcome {
        curve,
        buffer,
        env_steps,
        explored_steps,
        diverged_steps,
    })
}

/// PADA-DM learner: CEM over the deviation model, optionally warm-started
/// by a distilled target policy.
#[derive(Debug, Clone)]
pub struct PadaDm {
    pub deviation: DeviationModel,
    pub target_policy: Option<MlpPolicy>,
    pub cem: CemConfig,
    pub schedule: SgdSchedule,
    pub sgd_t: u64,
    pub cem_calls: u64,
}

impl PadaDm {
    pub fn new(ctx: &LoopContext<'_>, cem: CemConfig, rng: &RngStream) -> Result<Self> {
        cem.validate()?;
        let spec = ctx.target.spec();
        let norm = ctx.source_model.input_norm().clone();
        let deviation = DeviationModel::new(spec.state_dim, spec.action_dim, norm.clone(), &mut rng.derive("deviation-init"));
        let target_policy = if ctx.cfg.distill {
            Some(clone_source_policy(
                ctx.source,
                ctx.source_policy,
                norm.prefix(spec.state_dim),
                &ctx.cfg.distillation,
                &mut rng.derive("distill-init"),
            )?)
        } else {
            None
        };
        let total = ctx.cfg.iterations() * ctx.cfg.sgd_steps_per_iteration();
        Ok(Self {
            deviation,
            target_policy,
            cem,
            schedule: SgdSchedule::linear(ctx.cfg.learning_rate, total).with_max_grad_norm(ctx.cfg.grad_clip),
            sgd_t: 0,
            cem_calls: 0,
        })
    }

    pub fn plan(&self, ctx: &LoopContext<'_>, s: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        plan_action(
            s,
            &self.deviation.net,
            ctx.source_policy,
            self.target_policy.as_ref().map(|p| p as &dyn ControlPolicy),
            &ctx.target.spec().action_bounds,
            &self.cem,
            rng,
        )
    }
}

impl Learner for PadaDm {
    fn act(&mut self, ctx: &LoopContext<'_>, s: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        self.cem_calls += 1;
        self.plan(ctx, s, rng)
    }

    /// With distillation on, evaluation runs the distilled policy alone.
    fn eval_act(&self, ctx: &LoopContext<'_>, s: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        match &self.target_policy {
            Some(p) => Ok(p.action(s)),
            None => self.plan(ctx, s, rng),
        }
    }

    fn after_step(
        &mut self,
        ctx: &LoopContext<'_>,
        buffer: &ReplayBuffer,
        env_steps: u64,
        rng: &mut RngStream,
    ) -> Result<()> {
        let d = &ctx.cfg.distillation;
        if let Some(current) = &self.target_policy {
            if d.period > 0 && env_steps.is_multiple_of(d.period) {
                self.target_policy = Some(distill_target_policy(buffer, current, d, rng)?);
            }
        }
        Ok(())
    }

    fn update(
        &mut self,
        ctx: &LoopContext<'_>,
        buffer: &ReplayBuffer,
        steps: u64,
        rng: &mut RngStream,
    ) -> Result<()> {
        for _ in 0..steps {
            deviation_training_step_noisy(
                &mut self.deviation,
                buffer,
                ctx.cfg.batch_size,
                &self.schedule,
                self.sgd_t,
                ctx.cfg.target_noise_std,
                rng,
            )?;
            self.sgd_t += 1;
        }
        Ok(())
    }
}

/// The source policy acting unchanged; nothing is learned.
pub struct SourceOnly;

impl Learner for SourceOnly {
    fn act(&mut self, ctx: &LoopContext<'_>, s: &[f64], _rng: &mut RngStream) -> Result<Vec<f64>> {
        Ok(ctx.source_policy.action(s))
    }

    fn eval_act(&self, ctx: &LoopContext<'_>, s: &[f64], _rng: &mut RngStream) -> Result<Vec<f64>> {
        Ok(ctx.source_policy.action(s))
    }

    fn update(&mut self, _: &LoopContext<'_>, _: &ReplayBuffer, _: u64, _: &mut RngStream) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PadaDmOutcome {
    pub learner: PadaDm,
    pub run: LoopOutcome,
}

/// Deviation-model adaptation on a source/target pair.
pub fn pada_dm_run(
    pair: (&ContinuousEnv, &ContinuousEnv),
    source_policy: &dyn ControlPolicy,
    source_model: &SourceModel,
    cfg: &AdaptRunConfig,
    cem: &CemConfig,
    rng: &RngStream,
) -> Result<PadaDmOutcome> {
    let ctx = LoopContext {
        source: pair.0,
        target: pair.1,
        source_policy,
        source_model,
        cfg,
    };
    cfg.validate()?;
    let mut learner = PadaDm::new(&ctx, cem.clone(), rng)?;
    let run = run_loop(&ctx, &mut learner, rng)?;
    Ok(PadaDmOutcome { learner, run })
}

pub fn source_only_run(
    pair: (&ContinuousEnv, &ContinuousEnv),
    source_policy: &dyn ControlPolicy,
    source_model: &SourceModel,
    cfg: &AdaptRunConfig,
    rng: &RngStream,
) -> Result<LoopOutcome> {
    let ctx = LoopContext {
        source: pair.0,
        target: pair.1,
        source_policy,
        source_model,
        cfg,
    };
    run_loop(&ctx, &mut SourceOnly, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{make_pair, scripted_source_policy, EnvSpec, PerturbationConfig, ScriptedController};
    use crate::nn::Normalizer;

    struct Fixture {
        source: ContinuousEnv,
        target: ContinuousEnv,
        policy: ScriptedController,
        model: SourceModel,
    }

    fn fixture(mass: f64) -> Fixture {
        let spec = EnvSpec::pendulum();
        let (source, target) = make_pair(&spec, PerturbationConfig::with_mass(mass)).unwrap();
        let model = SourceModel::Exact {
            env: source.clone(),
            input_norm: Normalizer::identity(4),
        };
        Fixture {
            source,
            target,
            policy: scripted_source_policy(&spec),
            model,
        }
    }

    fn short(budget: u64) -> AdaptRunConfig {
        AdaptRunConfig {
            budget,
            eval_interval: 500,
            eval_episodes: 1,
            ..AdaptRunConfig::default()
        }
    }

    #[test]
    fn pure_exploration_never_plans() {
        let f = fixture(1.5);
        let cfg = AdaptRunConfig {
            explore_prob: 1.0,
            ..short(1000)
        };
        let out = pada_dm_run(
            (&f.source, &f.target),
            &f.policy,
            &f.model,
            &cfg,
            &CemConfig::default(),
            &RngStream::new(0, "eps1"),
        )
        .unwrap();
        assert_eq!(out.learner.cem_calls, 0);
        assert!(out.run.buffer.iter().all(|t| t.explored));
        assert!(out.run.curve.rows[1..].iter().all(|r| r.explored_fraction == 1.0));
        assert_eq!(out.run.explored_steps, 1000);
    }

    #[test]
    fn every_step_is_counted_once() {
        let f = fixture(1.5);
        let cfg = short(1500);
        let out = pada_dm_run(
            (&f.source, &f.target),
            &f.policy,
            &f.model,
            &cfg,
            &CemConfig::default(),
            &RngStream::new(1, "count"),
        )
        .unwrap();
        assert_eq!(out.run.env_steps, 1500);
        assert_eq!(out.run.buffer.len() as u64 + out.run.diverged_steps, 1500);
        let steps: Vec<u64> = out.run.curve.rows.iter().map(|r| r.env_steps).collect();
        assert_eq!(steps, vec![0, 500, 1000, 1500]);
        assert_eq!(out.learner.cem_calls, 1500 - out.run.explored_steps);
    }

    #[test]
    fn runs_are_reproducible() {
        let f = fixture(1.5);
        let cfg = short(1000);
        let run = || {
            pada_dm_run(
                (&f.source, &f.target),
                &f.policy,
                &f.model,
                &cfg,
                &CemConfig::default(),
                &RngStream::new(7, "repro"),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.run, b.run);
        assert_eq!(a.learner.deviation, b.learner.deviation);
    }

    /// Records the prefix hash once `at` triples exist.
    struct PrefixWatch {
        at: usize,
        hash: Option<String>,
    }

    impl Learner for PrefixWatch {
        fn act(&mut self, ctx: &LoopContext<'_>, s: &[f64], _: &mut RngStream) -> Result<Vec<f64>> {
            Ok(ctx.source_policy.action(s))
        }
        fn eval_act(&self, ctx: &LoopContext<'_>, s: &[f64], _: &mut RngStream) -> Result<Vec<f64>> {
            Ok(ctx.source_policy.action(s))
        }
        fn after_step(&mut self, _: &LoopContext<'_>, b: &ReplayBuffer, _: u64, _: &mut RngStream) -> Result<()> {
            if b.len() == self.at {
                self.hash = Some(b.prefix_hash(self.at));
            }
            Ok(())
        }
        fn update(&mut self, _: &LoopContext<'_>, _: &ReplayBuffer, _: u64, _: &mut RngStream) -> Result<()> {
            Ok(())
        }
    }

    #[test]
    fn buffer_only_grows() {
        let f = fixture(1.5);
        let cfg = AdaptRunConfig {
            explore_prob: 0.3,
            ..short(2000)
        };
        let ctx = LoopContext {
            source: &f.source,
            target: &f.target,
            source_policy: &f.policy,
            source_model: &f.model,
            cfg: &cfg,
        };
        let mut watch = PrefixWatch { at: 300, hash: None };
        let out = run_loop(&ctx, &mut watch, &RngStream::new(0, "prefix")).unwrap();
        assert_eq!(out.buffer.prefix_hash(300), watch.hash.unwrap());
    }

    #[test]
    fn source_only_on_identity_is_flat_with_zero_deviation() {
        let f = fixture(1.0);
        let out = source_only_run((&f.source, &f.target), &f.policy, &f.model, &short(1000), &RngStream::new(0, "flat")).unwrap();
        let first = &out.curve.rows[0];
        for r in &out.curve.rows {
            assert_eq!(r.episodic_return_mean, first.episodic_return_mean);
            assert_eq!(r.deviation_mean, 0.0);
        }
    }

    #[test]
    fn curve_csv_round_trip() {
        let curve = LearningCurve {
            rows: vec![
                CurveRow {
                    env_steps: 0,
                    episodic_return_mean: 1.5,
                    episodic_return_std: 0.25,
                    deviation_mean: 0.1,
                    explored_fraction: 0.0,
                    buffer_size: 0,
                    wall_time_s: None,
                },
                CurveRow {
                    env_steps: 1000,
                    episodic_return_mean: 3.0,
                    episodic_return_std: 0.5,
                    deviation_mean: 0.05,
                    explored_fraction: 0.01,
                    buffer_size: 1000,
                    wall_time_s: Some(2.0),
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        curve.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "env_steps,episodic_return_mean,episodic_return_std,deviation_mean,explored_fraction,buffer_size,wall_time_s"
        );
        assert_eq!(LearningCurve::read_csv(&path).unwrap(), curve);
        assert_eq!(curve.samples_to_threshold(2.0), Some(1000));
        assert_eq!(curve.samples_to_threshold(5.0), None);
    }

    #[test]
    fn config_validation() {
        assert!(AdaptRunConfig::default().validate().is_ok());
        let bad = |c: AdaptRunConfig| assert!(c.validate().is_err());
        bad(AdaptRunConfig { explore_prob: 1.5, ..AdaptRunConfig::default() });
        bad(AdaptRunConfig { iterations: Some(200), ..AdaptRunConfig::default() });
        bad(AdaptRunConfig { eval_interval: 750, ..AdaptRunConfig::default() });
        bad(AdaptRunConfig { learning_rate: 0.0, ..AdaptRunConfig::default() });
    }
}
