//! Builds a config in code, runs two short seeds and prints the summary
//! that `pada run` would write.

use pada::experiment::{run_experiment, ExperimentConfig};

fn main() -> pada::Result<()> {
    let out = std::env::temp_dir().join("pada-example-run");
    let text = format!(
        r#"{{
  "mode": "continuous",
  "env": "pendulum",
  "algorithm": "pada_dm",
  "perturbation": {{ "mass_scale": 1.5 }},
  "seeds": [0, 1],
  "adapt": {{ "budget": 3000, "learning_rate": 0.3, "grad_clip": 1.0, "eval_episodes": 2 }},
  "output_dir": {:?}
}}"#,
        out.display().to_string()
    );
    let cfg = ExperimentConfig::from_json_str(&text, "example")?;
    let summary = run_experiment(&cfg)?;
    println!("config {}", &summary.config_hash[..12]);
    for s in &summary.seeds {
        println!(
            "seed {}: final return {:.1}, csv {}",
            s.seed,
            s.final_return_mean.unwrap_or(f64::NAN),
            s.csv_path.display()
        );
    }
    Ok(())
}
