//! Adaptation with a behavior-cloned target policy that is refit to the
//! planner's actions every few thousand steps and evaluated on its own.

use pada::adapt::{pada_dm_run, AdaptRunConfig};
use pada::common::RngStream;
use pada::envs::{make_pair, scripted_source_policy, EnvSpec, PerturbationConfig};
use pada::experiment::{build_source_model, SourceModelConfig};
use pada::planner::CemConfig;

fn main() -> pada::Result<()> {
    let spec = EnvSpec::pendulum();
    let (source, target) = make_pair(&spec, PerturbationConfig::with_mass(1.5))?;
    let pi = scripted_source_policy(&spec);
    let model = build_source_model(&source, &SourceModelConfig::default(), 1)?;
    let mut cfg = AdaptRunConfig {
        budget: 15_000,
        learning_rate: 0.3,
        grad_clip: Some(1.0),
        distill: true,
        ..AdaptRunConfig::default()
    };
    cfg.distillation.polyak = 1.0;
    cfg.distillation.learning_rate = 0.1;
    cfg.distillation.sgd_steps = 5000;
    let out = pada_dm_run((&source, &target), &pi, &model, &cfg, &CemConfig::default(), &RngStream::new(1, "example"))?;
    for r in &out.run.curve.rows {
        println!("{:>6} steps: distilled policy return {:.1}", r.env_steps, r.episodic_return_mean);
    }
    Ok(())
}
