use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pada::adapt::LearningCurve;
use pada::envs::{reference_return, EnvKind};
use pada::experiment::{Algorithm, RunSummary, TabularSuiteSummary};

fn pada(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pada"));
    cmd.args(args).env_remove("PADA_SEED");
    if let Some(s) = seed_env {
        cmd.env("PADA_SEED", s);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SHORT_RUN: &str = r#"{
  "mode": "continuous",
  "env": "pendulum",
  "algorithm": "source_only",
  "perturbation": { "mass_scale": 1.5 },
  "seeds": [0, 1],
  "adapt": { "budget": 2000, "eval_episodes": 2 },
  "output_dir": "out"
}"#;

#[test]
fn malformed_config_reports_line_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\n  \"mode\": \"continuous\",\n  \"env\": ,\n}");
    let out = pada(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "typo.json", &SHORT_RUN.replace("\"seeds\"", "\"sedes\""));
    let out = pada(&["run", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sedes"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn summary_is_recomputable_from_the_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", SHORT_RUN);
    let out = pada(&["run", &cfg], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run_dir = dir.path().join("out");
    let text = fs::read_to_string(run_dir.join("summary.json")).unwrap();
    let summary: RunSummary = serde_json::from_str(&text).unwrap();
    let printed: RunSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary, printed);

    let outcomes: Vec<_> = [0, 1].iter().map(|&s| (s, run_dir.join(format!("seed-{s}.csv")), None)).collect();
    let rebuilt = RunSummary::from_csvs(
        summary.config_hash.clone(),
        Algorithm::SourceOnly,
        reference_return(EnvKind::Pendulum),
        &outcomes,
    )
    .unwrap();
    assert_eq!(rebuilt, summary);
}

#[test]
fn source_only_curve_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "flat.json", &SHORT_RUN.replace("1.5", "1.0"));
    assert!(pada(&["run", &cfg, "--seeds", "3"], None).status.success());
    let curve = LearningCurve::read_csv(&dir.path().join("out/seed-3.csv")).unwrap();
    assert_eq!(curve.rows.len(), 3);
    for r in &curve.rows {
        assert_eq!(r.episodic_return_mean, curve.rows[0].episodic_return_mean);
        assert!(r.deviation_mean < 1e-12);
    }
}

#[test]
fn seed_variable_replaces_first_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", SHORT_RUN);
    let alt = dir.path().join("alt");
    let out = pada(&["run", &cfg, "--out", alt.to_str().unwrap()], Some("7"));
    assert!(out.status.success());
    assert!(alt.join("seed-7.csv").is_file());
    assert!(alt.join("seed-1.csv").is_file());
    assert!(!alt.join("seed-0.csv").exists());
    assert!(!dir.path().join("out").exists());

    let out = pada(&["run", &cfg], Some("seven"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PADA_SEED"));
}

#[test]
fn parallel_seeds_match_sequential_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", SHORT_RUN);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(pada(&["run", &cfg, "--out", a.to_str().unwrap()], None).status.success());
    assert!(pada(&["run", &cfg, "--out", b.to_str().unwrap(), "--parallel", "2"], None).status.success());
    for name in ["seed-0.csv", "seed-1.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    // the summaries differ only in where they point
    let load = |d: &Path| -> RunSummary { serde_json::from_slice(&fs::read(d.join("summary.json")).unwrap()).unwrap() };
    let (sa, mut sb) = (load(&a), load(&b));
    sb.config_hash = sa.config_hash.clone();
    for (x, y) in sb.seeds.iter_mut().zip(&sa.seeds) {
        x.csv_path = y.csv_path.clone();
    }
    assert_eq!(sa, sb);
}

#[test]
fn tabular_subcommand_writes_its_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tab.json",
        r#"{
  "mode": "tabular",
  "tabular": {
    "instance": { "builtin": { "family": { "kind": "permuted-actions" }, "n_states": 4, "n_actions": 3, "horizon": 4, "seed": 1 } },
    "iterations": 50,
    "lemma_fuzz_pairs": 50
  },
  "output_dir": "tab"
}"#,
    );
    let out = pada(&["tabular", &cfg], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: TabularSuiteSummary = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary.iterations, 50);
    assert_eq!(summary.lemma_violations, 0);
    assert!(summary.final_one_step_gap < 1e-6);
    for f in ["tabular_report.csv", "ftl_regret.csv", "adaptability.csv", "lemma_fuzz.csv", "tabular_summary.json"] {
        assert!(dir.path().join("tab").join(f).is_file(), "{f}");
    }
}

#[test]
fn continuous_config_is_refused_by_the_tabular_suite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.json", SHORT_RUN);
    let out = pada(&["tabular", &cfg], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}
