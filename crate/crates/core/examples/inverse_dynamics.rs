//! The inverse-dynamics baseline: learn which action reaches a given next
//! state, then ask for the state the source model predicts.
//!
//! Trained from scratch on its own actions it fits that data well but stays
//! near the bottom, since the states it is asked to reach are ones it has
//! never produced.

use pada::adapt::idm::inverse_mse;
use pada::adapt::{idm_baseline_run, AdaptRunConfig};
use pada::common::RngStream;
use pada::envs::{make_pair, scripted_source_policy, EnvSpec, PerturbationConfig};
use pada::experiment::{build_source_model, SourceModelConfig};

fn main() -> pada::Result<()> {
    let spec = EnvSpec::pendulum();
    let (source, target) = make_pair(&spec, PerturbationConfig::with_mass(1.5))?;
    let pi = scripted_source_policy(&spec);
    let model = build_source_model(&source, &SourceModelConfig::default(), 0)?;
    let cfg = AdaptRunConfig {
        budget: 20_000,
        learning_rate: 0.3,
        grad_clip: Some(1.0),
        eval_interval: 2000,
        ..AdaptRunConfig::default()
    };
    let out = idm_baseline_run((&source, &target), &pi, &model, &cfg, &RngStream::new(0, "example"))?;
    for r in &out.run.curve.rows {
        println!("{:>6} steps: return {:.1}", r.env_steps, r.episodic_return_mean);
    }
    println!("action mse on collected data {:.2e}", inverse_mse(&out.learner.net, &out.run.buffer)?);
    Ok(())
}
