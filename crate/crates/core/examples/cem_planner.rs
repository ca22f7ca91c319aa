//! Cross-entropy minimization of a quadratic over a box, compared with the
//! known minimizer.

use pada::common::RngStream;
use pada::planner::{cem_minimize, ActionBox, CemConfig};

fn main() -> pada::Result<()> {
    let bounds = ActionBox::symmetric(2);
    let cfg = CemConfig::default();
    for (k, target) in [[0.3, -0.2], [0.9, 0.5], [1.5, 0.0]].iter().enumerate() {
        let f = |a: &[f64]| (a[0] - target[0]).powi(2) + 2.0 * (a[1] - target[1]).powi(2);
        let a = cem_minimize(f, &bounds, &[0.0, 0.0], &cfg, &mut RngStream::new(k as u64, "example/cem"))?;
        let want = bounds.clipped(target);
        println!("target {target:?}: cem {a:.4?}  box minimizer {want:?}");
    }
    Ok(())
}
