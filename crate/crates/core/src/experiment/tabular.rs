//! The tabular report suite: one adaptation run plus the divergence-bound
//! fuzz, the regret curve and the adaptability table.

use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::common::RngStream;
use crate::error::{PadaError, Result};
use crate::experiment::config::{ExperimentConfig, Mode, TabularInstanceRef};
use crate::tabular::generate::{generate_instance, random_chain_pair};
use crate::tabular::{
    adaptability_report, ftl_regret_curve, pada_tabular, verify_divergence_lemma, PadaTabularConfig, TabularMdp,
    TabularPolicy,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularSuiteSummary {
    pub config_hash: String,
    pub iterations: usize,
    pub final_one_step_gap: f64,
    pub final_trajectory_gap: Option<f64>,
    pub final_eps_term: f64,
    pub final_avg_regret: f64,
    pub lemma_pairs: usize,
    pub lemma_violations: usize,
    pub lemma_max_slack_used: f64,
    pub files: Vec<PathBuf>,
}

/// `(source, source policy, target)` named by the config.
pub fn load_instance(cfg: &ExperimentConfig) -> Result<(TabularMdp, TabularPolicy, TabularMdp)> {
    match cfg.tabular().instance {
        TabularInstanceRef::Builtin {
            family,
            n_states,
            n_actions,
            horizon,
            seed,
        } => {
            let inst = generate_instance(family, n_states, n_actions, horizon, &mut RngStream::new(seed, "instance"));
            Ok((inst.source, inst.source_policy, inst.target))
        }
        TabularInstanceRef::Files {
            source,
            target,
            source_policy,
        } => Ok((
            TabularMdp::load(&cfg.resolve(&source))?,
            TabularPolicy::new(source_policy),
            TabularMdp::load(&cfg.resolve(&target))?,
        )),
    }
}

fn csv_err(e: csv::Error) -> PadaError {
    PadaError::Io(e.to_string())
}

/// Writes `tabular_report.csv`, `ftl_regret.csv`, `adaptability.csv`,
/// `lemma_fuzz.csv` and `tabular_summary.json`. Everything is computed
/// before the output directory is touched, so a bad config or instance
/// leaves no files behind.
pub fn run_tabular_suite(cfg: &ExperimentConfig) -> Result<TabularSuiteSummary> {
    cfg.validate()?;
    if cfg.mode != Mode::Tabular {
        return Err(PadaError::InvalidConfig("the tabular suite needs mode \"tabular\"".into()));
    }
    let t = cfg.tabular();
    let seed = cfg.seeds[0];
    let (source, source_policy, target) = load_instance(cfg)?;

    let run = pada_tabular(
        &source,
        &source_policy,
        &target,
        &PadaTabularConfig {
            iterations: t.iterations,
            samples_per_iteration: t.samples_per_iteration,
            mode: t.collection,
            smoothing: t.smoothing,
            seed,
            initial_model: None,
        },
    )?;
    let regret = ftl_regret_curve(&run.report);
    let adapt = adaptability_report(&source, &source_policy, &target)?;

    let mut fuzz_rng = RngStream::new(seed, "lemma-fuzz");
    let mut checks = Vec::with_capacity(t.lemma_fuzz_pairs);
    for _ in 0..t.lemma_fuzz_pairs {
        let (a, b) = random_chain_pair(t.lemma_states, &mut fuzz_rng);
        checks.push(verify_divergence_lemma(&a, &b, t.lemma_horizon)?);
    }

    let out = cfg.resolve(&cfg.output_dir);
    fs::create_dir_all(&out)?;
    let mut files = Vec::new();

    let path = out.join("tabular_report.csv");
    run.report.write_csv(fs::File::create(&path)?)?;
    files.push(path);

    let path = out.join("ftl_regret.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(["iteration", "avg_regret"]).map_err(csv_err)?;
    for (i, r) in regret.iter().enumerate() {
        w.write_record([(i + 1).to_string(), r.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    files.push(path);

    let path = out.join("adaptability.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(["state", "source_action", "eps", "argmin_target_action"]).map_err(csv_err)?;
    for (s, row) in adapt.eps.iter().enumerate() {
        for (a, e) in row.iter().enumerate() {
            w.write_record([
                s.to_string(),
                a.to_string(),
                e.to_string(),
                adapt.argmin_actions[s][a].to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    files.push(path);

    let path = out.join("lemma_fuzz.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
    w.write_record(["pair", "lhs", "rhs", "holds"]).map_err(csv_err)?;
    for (i, c) in checks.iter().enumerate() {
        w.write_record([i.to_string(), c.lhs.to_string(), c.rhs.to_string(), c.holds.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    files.push(path);

    let last = run.report.last();
    let summary = TabularSuiteSummary {
        config_hash: cfg.content_hash(),
        iterations: run.report.records.len(),
        final_one_step_gap: last.one_step_gap,
        final_trajectory_gap: last.trajectory_gap,
        final_eps_term: last.eps_term,
        final_avg_regret: regret.last().copied().unwrap_or(0.0),
        lemma_pairs: checks.len(),
        lemma_violations: checks.iter().filter(|c| !c.holds).count(),
        lemma_max_slack_used: checks
            .iter()
            .map(|c| if c.rhs > 0.0 { c.lhs / c.rhs } else { 0.0 })
            .fold(0.0, f64::max),
        files: files.clone(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| PadaError::Io(e.to_string()))?;
    fs::write(out.join("tabular_summary.json"), json + "\n")?;
    Ok(summary)
}
