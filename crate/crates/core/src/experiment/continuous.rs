//! Seed sweeps of the continuous adaptation methods.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adapt::idm::InverseDynamics;
use crate::adapt::{run_loop_logged, AdaptRunConfig, CurveRow, Learner, LearningCurve, LoopContext, PadaDm, SourceOnly};
use crate::common::RngStream;
use crate::envs::{collect_transitions, make_pair, reference_return, scripted_source_policy, ContinuousEnv};
use crate::error::{PadaError, Result};
use crate::experiment::config::{Algorithm, ExperimentConfig, Mode, SourceModelConfig};
use crate::nn::pretrain::fit_normalizer;
use crate::nn::{checkpoint, pretrain_source_model, SourceModel};

/// Fraction of the source-in-source reference that counts as adapted.
pub const THRESHOLD_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub status: SeedStatus,
    pub error: Option<String>,
    pub csv_path: PathBuf,
    pub final_env_steps: Option<u64>,
    pub final_return_mean: Option<f64>,
    pub final_return_std: Option<f64>,
    pub final_deviation: Option<f64>,
    pub samples_to_threshold: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config_hash: String,
    pub algorithm: Algorithm,
    pub reference_return: f64,
    pub threshold: f64,
    /// Mean over completed seeds of each seed's final mean return.
    pub final_return_mean: Option<f64>,
    /// Population std over completed seeds of the same.
    pub final_return_std: Option<f64>,
    pub final_deviation_mean: Option<f64>,
    pub seeds_reaching_threshold: usize,
    pub seeds: Vec<SeedSummary>,
}

impl RunSummary {
    pub fn failed_seeds(&self) -> Vec<u64> {
        self.seeds
            .iter()
            .filter(|s| s.status == SeedStatus::Failed)
            .map(|s| s.seed)
            .collect()
    }

    /// Rebuilds every statistic from the per-seed CSVs named in `seeds`.
    pub fn from_csvs(
        config_hash: String,
        algorithm: Algorithm,
        reference_return: f64,
        outcomes: &[(u64, PathBuf, Option<String>)],
    ) -> Result<Self> {
        let threshold = THRESHOLD_FRACTION * reference_return;
        let mut seeds = Vec::with_capacity(outcomes.len());
        for (seed, path, error) in outcomes {
            let curve = if path.is_file() {
                LearningCurve::read_csv(path)?
            } else {
                LearningCurve::default()
            };
            let last = curve.last();
            seeds.push(SeedSummary {
                seed: *seed,
                status: if error.is_some() {
                    SeedStatus::Failed
                } else {
                    SeedStatus::Ok
                },
                error: error.clone(),
                csv_path: path.clone(),
                final_env_steps: last.map(|r| r.env_steps),
                final_return_mean: last.map(|r| r.episodic_return_mean),
                final_return_std: last.map(|r| r.episodic_return_std),
                final_deviation: last.map(|r| r.deviation_mean),
                samples_to_threshold: curve.samples_to_threshold(threshold),
            });
        }
        let ok: Vec<&SeedSummary> = seeds.iter().filter(|s| s.status == SeedStatus::Ok).collect();
        let finals: Vec<f64> = ok.iter().filter_map(|s| s.final_return_mean).collect();
        let devs: Vec<f64> = ok.iter().filter_map(|s| s.final_deviation).collect();
        let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
        let final_return_mean = mean(&finals);
        let final_return_std = final_return_mean.map(|m| {
            (finals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / finals.len() as f64).sqrt()
        });
        Ok(Self {
            config_hash,
            algorithm,
            reference_return,
            threshold,
            final_return_mean,
            final_return_std,
            final_deviation_mean: mean(&devs),
            seeds_reaching_threshold: ok.iter().filter(|s| s.samples_to_threshold.is_some()).count(),
            seeds,
        })
    }
}

/// Source model for one seed.
pub fn build_source_model(source: &ContinuousEnv, cfg: &SourceModelConfig, seed: u64) -> Result<SourceModel> {
    let policy = scripted_source_policy(source.spec());
    let rng = RngStream::new(seed, "source-model");
    let triples = collect_transitions(source, &policy, cfg.triples, cfg.jitter_std, &mut rng.derive("collect"))?;
    if cfg.exact {
        Ok(SourceModel::Exact {
            env: source.clone(),
            input_norm: fit_normalizer(&triples),
        })
    } else {
        let (model, stats) = pretrain_source_model(&triples, &cfg.pretrain, &mut rng.derive("pretrain"))?;
        log::info!("seed {seed}: source model held-out mse {:.3e}", stats.heldout_mse);
        Ok(model)
    }
}

pub fn seed_csv_path(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed-{seed}.csv"))
}

/// Runs one seed, streaming curve rows to its CSV.
fn run_seed(cfg: &ExperimentConfig, adapt: &AdaptRunConfig, out: &Path, seed: u64) -> Result<()> {
    let spec = cfg.env_spec()?;
    let (source, target) = make_pair(&spec, cfg.perturbation.clone())?;
    let source_policy = scripted_source_policy(&spec);
    let source_model = build_source_model(&source, &cfg.source_model, seed)?;
    let ctx = LoopContext {
        source: &source,
        target: &target,
        source_policy: &source_policy,
        source_model: &source_model,
        cfg: adapt,
    };
    let algorithm = cfg.algorithm();
    let rng = RngStream::new(seed, algorithm.name());

    let mut writer = csv::Writer::from_path(seed_csv_path(out, seed)).map_err(|e| PadaError::Io(e.to_string()))?;
    let mut sink = |row: &CurveRow| -> Result<()> {
        writer.serialize(row).map_err(|e| PadaError::Io(e.to_string()))?;
        writer.flush()?;
        Ok(())
    };
    let stem = out.join(format!("seed-{seed}"));
    match algorithm {
        Algorithm::PadaDm | Algorithm::PadaDmDistill => {
            let mut learner = PadaDm::new(&ctx, cfg.cem.clone(), &rng)?;
            run_loop_logged(&ctx, &mut learner, &rng, &mut sink)?;
            checkpoint::save(&learner.deviation.net, &with_ext(&stem, "deviation.bin"))?;
            if let Some(p) = &learner.target_policy {
                checkpoint::save(&p.net, &with_ext(&stem, "policy.bin"))?;
            }
        }
        Algorithm::IdmBaseline => {
            let mut learner = InverseDynamics::new(&ctx, &rng);
            run_loop_logged(&ctx, &mut learner, &rng, &mut sink)?;
            checkpoint::save(&learner.net, &with_ext(&stem, "idm.bin"))?;
        }
        Algorithm::SourceOnly => {
            let mut learner = SourceOnly;
            run_loop_logged(&ctx, &mut learner as &mut dyn Learner, &rng, &mut sink)?;
        }
        Algorithm::Pada => unreachable!("rejected by validation"),
    }
    Ok(())
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    PathBuf::from(format!("{}.{ext}", stem.display()))
}

/// Runs every seed of a continuous config and writes `seed-*.csv` plus
/// `summary.json` under the output directory. A failing seed keeps the
/// rows it logged and is marked failed in the summary; the sweep goes on.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    if cfg.mode != Mode::Continuous {
        return Err(PadaError::InvalidConfig(
            "run_experiment takes a continuous config; use the tabular suite for tabular mode".into(),
        ));
    }
    let algorithm = cfg.algorithm();
    let mut adapt = cfg.adapt.clone();
    adapt.distill = algorithm == Algorithm::PadaDmDistill;
    let out = cfg.resolve(&cfg.output_dir);
    fs::create_dir_all(&out)?;

    let job = |&seed: &u64| {
        let err = run_seed(cfg, &adapt, &out, seed).err().map(|e| {
            log::error!("seed {seed} failed: {e}");
            e.to_string()
        });
        (seed, seed_csv_path(&out, seed), err)
    };
    let outcomes: Vec<(u64, PathBuf, Option<String>)> = if cfg.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallel)
            .build()
            .map_err(|e| PadaError::InvalidConfig(e.to_string()))?;
        pool.install(|| cfg.seeds.par_iter().map(job).collect())
    } else {
        cfg.seeds.iter().map(job).collect()
    };

    let spec = cfg.env_spec()?;
    let summary = RunSummary::from_csvs(cfg.content_hash(), algorithm, reference_return(spec.kind), &outcomes)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| PadaError::Io(e.to_string()))?;
    fs::write(out.join("summary.json"), json + "\n")?;
    Ok(summary)
}
