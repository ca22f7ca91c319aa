//! Fits the residual source dynamics model on jittered source-policy
//! transitions and reports its held-out error.

use pada::common::RngStream;
use pada::envs::{collect_transitions, scripted_source_policy, ContinuousEnv, EnvSpec, PerturbationConfig};
use pada::nn::{pretrain_source_model, PretrainConfig};

fn main() -> pada::Result<()> {
    let spec = EnvSpec::pendulum();
    let env = ContinuousEnv::new(spec.clone(), PerturbationConfig::identity())?;
    let pi = scripted_source_policy(&spec);
    let triples = collect_transitions(&env, &pi, 20_000, 0.2, &mut RngStream::new(0, "example/collect"))?;
    let (_, stats) = pretrain_source_model(&triples, &PretrainConfig::default(), &mut RngStream::new(0, "example/fit"))?;
    println!(
        "{} train / {} held out: train mse {:.2e}, held-out rmse {:.4}",
        stats.n_train,
        stats.n_heldout,
        stats.final_train_mse,
        stats.heldout_mse.sqrt()
    );
    Ok(())
}
