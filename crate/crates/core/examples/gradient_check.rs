//! Backpropagation against central differences on a full-size network.

use pada::common::RngStream;
use pada::nn::{finite_difference_check, Minibatch, Mlp};

fn main() -> pada::Result<()> {
    let mut rng = RngStream::new(0, "example/gradcheck");
    let net = Mlp::standard(4, 3, &mut rng);
    let x: Vec<f64> = (0..32).map(|_| rng.normal()).collect();
    let y: Vec<f64> = (0..24).map(|_| rng.normal()).collect();
    let batch = Minibatch::new(x, y, 8)?;
    let check = finite_difference_check(&net, &batch, 100, 1e-5, &mut rng)?;
    for ((i, a), n) in check.coords.iter().zip(&check.analytic).zip(&check.numeric).take(5) {
        println!("param {i:>5}: backprop {a:+.6e}  finite diff {n:+.6e}");
    }
    println!("{} of {} params checked, max relative error {:.2e}", check.coords.len(), net.n_params(), check.max_rel_error);
    Ok(())
}
