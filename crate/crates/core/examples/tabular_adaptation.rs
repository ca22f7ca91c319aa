//! Adapts a source policy to a target whose action labels are shuffled,
//! then prints how the one-step and trajectory gaps shrink.

use pada::common::RngStream;
use pada::tabular::generate::{generate_instance, InstanceFamily};
use pada::tabular::{pada_tabular, CollectionMode, PadaTabularConfig};

fn main() -> pada::Result<()> {
    let inst = generate_instance(InstanceFamily::PermutedActions, 5, 3, 5, &mut RngStream::new(0, "example"));
    for mode in [CollectionMode::ExactExpectation, CollectionMode::Sampled] {
        let cfg = PadaTabularConfig {
            iterations: 100,
            samples_per_iteration: 200,
            mode,
            seed: 0,
            ..PadaTabularConfig::default()
        };
        let run = pada_tabular(&inst.source, &inst.source_policy, &inst.target, &cfg)?;
        println!("{mode:?}");
        for r in run.report.records.iter().filter(|r| [1, 10, 100].contains(&r.iteration)) {
            println!(
                "  iter {:>3}  one-step gap {:.2e}  trajectory gap {:.2e}",
                r.iteration,
                r.one_step_gap,
                r.trajectory_gap.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
