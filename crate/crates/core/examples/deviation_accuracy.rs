//! Predicted versus actual deviation along target trajectories, before and
//! after a short adaptation run.

use pada::adapt::{deviation_accuracy_report, pada_dm_run, AdaptRunConfig, DeviationModel};
use pada::common::RngStream;
use pada::envs::{make_pair, scripted_source_policy, EnvSpec, PerturbationConfig};
use pada::experiment::{build_source_model, SourceModelConfig};
use pada::planner::CemConfig;

fn main() -> pada::Result<()> {
    let spec = EnvSpec::pendulum();
    let (source, target) = make_pair(&spec, PerturbationConfig::with_mass(1.5))?;
    let pi = scripted_source_policy(&spec);
    let model = build_source_model(&source, &SourceModelConfig::default(), 0)?;
    let rng = RngStream::new(0, "example/report");

    let fresh = DeviationModel::new(3, 1, model.input_norm().clone(), &mut RngStream::new(0, "example/init"));
    let before = deviation_accuracy_report(&fresh, &target, &model, &pi, &pi, 10, &rng)?;
    println!("untrained slope {:?}", before.slope());

    let cfg = AdaptRunConfig {
        budget: 5000,
        learning_rate: 0.3,
        grad_clip: Some(1.0),
        ..AdaptRunConfig::default()
    };
    let out = pada_dm_run((&source, &target), &pi, &model, &cfg, &CemConfig::default(), &RngStream::new(0, "example"))?;
    let after = deviation_accuracy_report(&out.learner.deviation, &target, &model, &pi, &pi, 10, &rng)?;
    for (p, a) in after.trajectory_means.iter().take(5) {
        println!("trajectory mean: predicted {p:.4}  actual {a:.4}");
    }
    println!("trained slope {:?}", after.slope());
    let path = std::env::temp_dir().join("deviation_pairs.csv");
    after.write_csv(&path)?;
    println!("pairs written to {}", path.display());
    Ok(())
}
