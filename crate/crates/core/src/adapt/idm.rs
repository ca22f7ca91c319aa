//! Inverse-dynamics baseline: `φ(s, s′) → a`, queried at the source
//! model's prediction of where the source policy would go.

use crate::adapt::buffer::ReplayBuffer;
use crate::adapt::policy::{regression_mse, RegressionData};
use crate::adapt::run::{run_loop, AdaptRunConfig, Learner, LoopContext, LoopOutcome};
use crate::common::RngStream;
use crate::envs::{ContinuousEnv, ControlPolicy};
use crate::error::{PadaError, Result};
use crate::nn::{grad, sgd_step, Loss, Minibatch, Mlp, SgdSchedule, SourceModel};

#[derive(Debug, Clone)]
pub struct InverseDynamics {
    pub net: Mlp,
    pub schedule: SgdSchedule,
    pub sgd_t: u64,
}

impl InverseDynamics {
    pub fn new(ctx: &LoopContext<'_>, rng: &RngStream) -> Self {
        let spec = ctx.target.spec();
        let state_norm = ctx.source_model.input_norm().prefix(spec.state_dim);
        let net = Mlp::standard(2 * spec.state_dim, spec.action_dim, &mut rng.derive("idm-init"))
            .with_input_norm(state_norm.concat(&state_norm));
        let total = ctx.cfg.iterations() * ctx.cfg.sgd_steps_per_iteration();
        Self {
            net,
            schedule: SgdSchedule::linear(ctx.cfg.learning_rate, total).with_max_grad_norm(ctx.cfg.grad_clip),
            sgd_t: 0,
        }
    }

    /// `clip(φ(s, s_desired))`.
    pub fn query(&self, ctx: &LoopContext<'_>, s: &[f64], desired: &[f64]) -> Result<Vec<f64>> {
        let x: Vec<f64> = s.iter().chain(desired).copied().collect();
        let mut a = self.net.forward(&x)?;
        ctx.target.spec().action_bounds.clip(&mut a);
        Ok(a)
    }

    pub fn policy_action(&self, ctx: &LoopContext<'_>, s: &[f64]) -> Result<Vec<f64>> {
        let desired = ctx.source_model.predict(s, &ctx.source_policy.action(s))?;
        self.query(ctx, s, &desired)
    }
}

/// `(s, s′) → a` pairs from the buffer.
pub fn inverse_pairs(buffer: &ReplayBuffer) -> RegressionData {
    let mut d = RegressionData::default();
    for t in buffer.iter() {
        d.push(t.s.iter().chain(&t.s_next).copied().collect(), t.a.clone());
    }
    d
}

/// Held-out action MSE of `φ` on `buffer`.
pub fn inverse_mse(net: &Mlp, buffer: &ReplayBuffer) -> Result<f64> {
    regression_mse(net, &inverse_pairs(buffer))
}

impl Learner for InverseDynamics {
    fn act(&mut self, ctx: &LoopContext<'_>, s: &[f64], _rng: &mut RngStream) -> Result<Vec<f64>> {
        self.policy_action(ctx, s)
    }

    fn eval_act(&self, ctx: &LoopContext<'_>, s: &[f64], _rng: &mut RngStream) -> Result<Vec<f64>> {
        self.policy_action(ctx, s)
    }

    fn update(
        &mut self,
        ctx: &LoopContext<'_>,
        buffer: &ReplayBuffer,
        steps: u64,
        rng: &mut RngStream,
    ) -> Result<()> {
        let bs = ctx.cfg.batch_size;
        for _ in 0..steps {
            let idx = buffer.sample_indices(bs, rng)?;
            let mut x = Vec::with_capacity(bs * self.net.input_dim());
            let mut y = Vec::with_capacity(bs * self.net.output_dim());
            for i in idx {
                let t = &buffer.as_slice()[i];
                x.extend_from_slice(&t.s);
                x.extend_from_slice(&t.s_next);
                y.extend_from_slice(&t.a);
            }
            let batch = Minibatch::new(x, y, bs)?;
            let (loss, g) = grad(&self.net, &batch, Loss::Mse)?;
            if !loss.is_finite() {
                return Err(PadaError::TrainingDiverged { step: self.sgd_t });
            }
            sgd_step(&mut self.net, &g, &self.schedule, self.sgd_t);
            self.sgd_t += 1;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IdmOutcome {
    pub learner: InverseDynamics,
    pub run: LoopOutcome,
}

/// Trains and runs the inverse-dynamics baseline under the same loop,
/// exploration and logging as PADA-DM.
pub fn idm_baseline_run(
    pair: (&ContinuousEnv, &ContinuousEnv),
    source_policy: &dyn ControlPolicy,
    source_model: &SourceModel,
    cfg: &AdaptRunConfig,
    rng: &RngStream,
) -> Result<IdmOutcome> {
    let ctx = LoopContext {
        source: pair.0,
        target: pair.1,
        source_policy,
        source_model,
        cfg,
    };
    cfg.validate()?;
    let mut learner = InverseDynamics::new(&ctx, rng);
    let run = run_loop(&ctx, &mut learner, rng)?;
    Ok(IdmOutcome { learner, run })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapt::buffer::TransitionTriple;
    use crate::adapt::policy::fit_regression;
    use crate::adapt::run::evaluate_actor;
    use crate::common::Environment;
    use crate::envs::{make_pair, scripted_source_policy, EnvSpec, PerturbationConfig};
    use crate::nn::Normalizer;

    fn random_action_buffer(env: &ContinuousEnv, n: usize, rng: &mut RngStream) -> ReplayBuffer {
        let bounds = env.spec().action_bounds.clone();
        let mut b = ReplayBuffer::new();
        let mut s = env.reset(rng);
        for i in 0..n {
            if i % 50 == 0 {
                s = env.reset(rng);
            }
            let a = bounds.sample_uniform(rng);
            let next = env.step(&s, &a, rng).unwrap();
            b.push(TransitionTriple {
                s: s.clone(),
                a,
                s_next: next.clone(),
                source_pred: next.clone(),
                explored: true,
            })
            .unwrap();
            s = next;
        }
        b
    }

    #[test]
    fn recovers_actions_on_held_out_triples() {
        let spec = EnvSpec::pendulum();
        let (source, _) = make_pair(&spec, PerturbationConfig::identity()).unwrap();
        let mut rng = RngStream::new(0, "idm");
        let train = random_action_buffer(&source, 5000, &mut rng);
        let test = random_action_buffer(&source, 1000, &mut rng);
        let norm = Normalizer::fit(
            &train.iter().flat_map(|t| t.s.clone()).collect::<Vec<_>>(),
            3,
        );
        let mut net = Mlp::standard(6, 1, &mut rng).with_input_norm(norm.concat(&norm));
        let steps = 6000;
        fit_regression(&mut net, &inverse_pairs(&train), steps, 64, &SgdSchedule::linear(0.1, steps), &mut rng).unwrap();
        let mse = inverse_mse(&net, &test).unwrap();
        assert!(mse < 1e-2, "held-out action mse {mse}");
    }

    #[test]
    fn untrained_model_is_uninformed() {
        let spec = EnvSpec::pendulum();
        let (source, target) = make_pair(&spec, PerturbationConfig::identity()).unwrap();
        let pi = scripted_source_policy(&spec);
        let sm = SourceModel::Exact {
            env: source.clone(),
            input_norm: Normalizer::identity(4),
        };
        let cfg = AdaptRunConfig::default();
        let ctx = LoopContext {
            source: &source,
            target: &target,
            source_policy: &pi,
            source_model: &sm,
            cfg: &cfg,
        };
        let idm = InverseDynamics::new(&ctx, &RngStream::new(3, "idm"));
        let n = 10;
        let untrained = evaluate_actor(&target, &sm, &pi, n, 0, &mut |s, _| idm.policy_action(&ctx, s)).unwrap();
        let bounds = spec.action_bounds.clone();
        let mut r = RngStream::new(0, "random-actions");
        let random = evaluate_actor(&target, &sm, &pi, n, 0, &mut |_, _| Ok(bounds.sample_uniform(&mut r))).unwrap();
        let source_ret = evaluate_actor(&target, &sm, &pi, n, 0, &mut |s, _| Ok(pi.action(s))).unwrap();
        let (u, r, src) = (untrained.mean_return(), random.mean_return(), source_ret.mean_return());
        assert!(u < 0.1 * src && r < 0.1 * src, "untrained {u} random {r} source {src}");
        assert!((u - r).abs() < 0.05 * src, "untrained {u} random {r} source {src}");
    }
}
