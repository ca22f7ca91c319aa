use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pada::experiment::{parse_seed_list, run_experiment, run_tabular_suite, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "pada", version, about = "Policy adaptation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a continuous adaptation config over its seeds.
    Run {
        config: PathBuf,
        /// Comma-separated seeds replacing the config's list.
        #[arg(long)]
        seeds: Option<String>,
        /// Output directory replacing the config's.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seeds run concurrently.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Run the tabular report suite.
    Tabular {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every acceptance check and print a pass/fail table.
    Verify {
        /// Where the verification runs write their logs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn absolute(p: PathBuf) -> std::io::Result<PathBuf> {
    Ok(if p.is_absolute() { p } else { std::env::current_dir()?.join(p) })
}

fn load(config: &Path, overrides: Overrides) -> pada::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config)?;
    cfg.apply(&overrides.with_env_seed()?)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PADA_LOG", "warn")).init();
    let cli = Cli::parse();
    let result: pada::Result<bool> = (|| match cli.command {
        Command::Run {
            config,
            seeds,
            out,
            parallel,
        } => {
            let overrides = Overrides {
                seeds: seeds.as_deref().map(parse_seed_list).transpose()?,
                output_dir: out.map(absolute).transpose()?,
                parallel,
                first_seed: None,
            };
            let cfg = load(&config, overrides)?;
            let summary = run_experiment(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(summary.failed_seeds().is_empty())
        }
        Command::Tabular { config, out } => {
            let overrides = Overrides {
                output_dir: out.map(absolute).transpose()?,
                ..Overrides::default()
            };
            let cfg = load(&config, overrides)?;
            let summary = run_tabular_suite(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(true)
        }
        Command::Verify { out } => {
            let out = match out {
                Some(p) => absolute(p)?,
                None => std::env::temp_dir().join(format!("pada-verify-{}", std::process::id())),
            };
            let results = pada::verify::run_all(&out);
            for r in &results {
                println!("{r}");
            }
            let passed = results.iter().filter(|r| r.passed).count();
            println!("{passed}/{} criteria passed; logs in {}", results.len(), out.display());
            Ok(passed == results.len())
        }
    })();
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
