//! Saves a network to the binary checkpoint format and reads it back.

use pada::common::RngStream;
use pada::nn::{checkpoint, Mlp, Normalizer};

fn main() -> pada::Result<()> {
    let norm = Normalizer {
        mean: vec![0.0, 0.5, -1.0, 0.0],
        std: vec![1.0, 2.0, 0.5, 1.0],
    };
    let net = Mlp::standard(4, 3, &mut RngStream::new(0, "example/ckpt")).with_input_norm(norm);
    let path = std::env::temp_dir().join("example-net.bin");
    checkpoint::save(&net, &path)?;
    let back = checkpoint::load(&path)?;
    assert_eq!(net, back);
    println!(
        "{} params round-tripped through {} (+ {})",
        back.n_params(),
        path.display(),
        checkpoint::sidecar_path(&path).display()
    );
    Ok(())
}
