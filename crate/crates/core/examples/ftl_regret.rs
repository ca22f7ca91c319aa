//! Average follow-the-leader regret of the aggregated model fits.

use pada::common::RngStream;
use pada::tabular::generate::{generate_instance, InstanceFamily};
use pada::tabular::{ftl_regret_curve, pada_tabular, PadaTabularConfig};

fn main() -> pada::Result<()> {
    let inst = generate_instance(InstanceFamily::Random, 5, 3, 5, &mut RngStream::new(1, "example/ftl"));
    let cfg = PadaTabularConfig {
        iterations: 256,
        ..PadaTabularConfig::default()
    };
    let run = pada_tabular(&inst.source, &inst.source_policy, &inst.target, &cfg)?;
    let regret = ftl_regret_curve(&run.report);
    for t in [1usize, 4, 16, 64, 256] {
        println!("T = {t:>3}  average regret {:.3e}", regret[t - 1]);
    }
    Ok(())
}
