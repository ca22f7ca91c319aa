//! The irreducible part of the adaptation gap: targets blended toward
//! uniform cannot reproduce the source transitions exactly.

use pada::common::RngStream;
use pada::tabular::generate::{generate_instance, InstanceFamily};
use pada::tabular::{adaptability_report, pada_tabular, PadaTabularConfig};

fn main() -> pada::Result<()> {
    for beta in [0.0, 0.05, 0.1, 0.3] {
        let inst = generate_instance(InstanceFamily::Mixed { beta }, 5, 3, 5, &mut RngStream::new(0, "example/mix"));
        let eps = adaptability_report(&inst.source, &inst.source_policy, &inst.target)?;
        let worst = eps.eps.iter().flatten().fold(0.0f64, |m, &e| m.max(e));
        let run = pada_tabular(&inst.source, &inst.source_policy, &inst.target, &PadaTabularConfig::default())?;
        let last = run.report.last();
        println!(
            "beta {beta:.2}: max eps {worst:.4}  final gap {:.4}  floor {:.4}",
            last.one_step_gap, last.eps_term
        );
    }
    Ok(())
}
