//! Deviation-model adaptation to a pendulum 1.5x heavier than the one the
//! source controller was tuned on. Takes a minute or two in release mode.

use pada::adapt::{evaluate_source_policy, pada_dm_run, AdaptRunConfig};
use pada::common::RngStream;
use pada::envs::{make_pair, scripted_source_policy, EnvSpec, PerturbationConfig};
use pada::experiment::{build_source_model, SourceModelConfig};
use pada::planner::CemConfig;

fn main() -> pada::Result<()> {
    let spec = EnvSpec::pendulum();
    let (source, target) = make_pair(&spec, PerturbationConfig::with_mass(1.5))?;
    let pi = scripted_source_policy(&spec);
    let model = build_source_model(&source, &SourceModelConfig::default(), 0)?;
    let cfg = AdaptRunConfig {
        budget: 10_000,
        learning_rate: 0.3,
        grad_clip: Some(1.0),
        ..AdaptRunConfig::default()
    };
    let before = evaluate_source_policy(&target, &model, &pi, 5, 0)?;
    println!("unadapted: return {:.1}, deviation {:.4}", before.mean_return(), before.deviation_mean);
    let out = pada_dm_run((&source, &target), &pi, &model, &cfg, &CemConfig::default(), &RngStream::new(0, "example"))?;
    for r in &out.run.curve.rows {
        println!("{:>6} steps: return {:>6.1}  deviation {:.4}", r.env_steps, r.episodic_return_mean, r.deviation_mean);
    }
    Ok(())
}
