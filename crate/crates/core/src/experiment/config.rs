//! The JSON experiment document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adapt::AdaptRunConfig;
use crate::envs::{EnvKind, EnvSpec, PerturbationConfig};
use crate::error::{PadaError, Result};
use crate::nn::PretrainConfig;
use crate::planner::CemConfig;
use crate::tabular::generate::InstanceFamily;
use crate::tabular::model::DEFAULT_SMOOTHING;
use crate::tabular::CollectionMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Tabular,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// The exact tabular loop.
    Pada,
    PadaDm,
    PadaDmDistill,
    IdmBaseline,
    SourceOnly,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pada => "pada",
            Algorithm::PadaDm => "pada_dm",
            Algorithm::PadaDmDistill => "pada_dm_distill",
            Algorithm::IdmBaseline => "idm_baseline",
            Algorithm::SourceOnly => "source_only",
        }
    }

    pub fn valid_for(self, mode: Mode) -> bool {
        match mode {
            Mode::Tabular => self == Algorithm::Pada,
            Mode::Continuous => self != Algorithm::Pada,
        }
    }
}

/// How `f̂(s, π_s(s))` is obtained for a continuous run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceModelConfig {
    /// Use the exact source step instead of a pretrained network.
    pub exact: bool,
    /// Source-environment transitions collected for pretraining (and for
    /// the input normalizer in either case).
    pub triples: usize,
    /// Gaussian jitter on the source policy's actions while collecting.
    pub jitter_std: f64,
    pub pretrain: PretrainConfig,
}

impl Default for SourceModelConfig {
    fn default() -> Self {
        Self {
            exact: true,
            triples: 10_000,
            jitter_std: 0.2,
            pretrain: PretrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TabularInstanceRef {
    /// Generated from a built-in family.
    Builtin {
        family: InstanceFamily,
        n_states: usize,
        n_actions: usize,
        horizon: usize,
        seed: u64,
    },
    /// Source and target read from JSON files, relative to the config.
    Files {
        source: PathBuf,
        target: PathBuf,
        source_policy: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TabularSuiteConfig {
    pub instance: TabularInstanceRef,
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub collection: CollectionMode,
    pub smoothing: f64,
    pub lemma_fuzz_pairs: usize,
    pub lemma_states: usize,
    pub lemma_horizon: usize,
}

impl Default for TabularSuiteConfig {
    fn default() -> Self {
        Self {
            instance: TabularInstanceRef::Builtin {
                family: InstanceFamily::PermutedActions,
                n_states: 5,
                n_actions: 3,
                horizon: 5,
                seed: 0,
            },
            iterations: 200,
            samples_per_iteration: 100,
            collection: CollectionMode::ExactExpectation,
            smoothing: DEFAULT_SMOOTHING,
            lemma_fuzz_pairs: 1000,
            lemma_states: 3,
            lemma_horizon: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub env: Option<EnvKind>,
    #[serde(default)]
    pub algorithm: Option<Algorithm>,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub cem: CemConfig,
    #[serde(default)]
    pub adapt: AdaptRunConfig,
    #[serde(default)]
    pub source_model: SourceModelConfig,
    #[serde(default)]
    pub tabular: Option<TabularSuiteConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker threads for the seed sweep; 1 runs seeds in order.
    #[serde(default = "default_parallel")]
    pub parallel: usize,
    /// Directory that relative file references resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_parallel() -> usize {
    1
}

/// Command-line adjustments applied on top of the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub output_dir: Option<PathBuf>,
    pub parallel: Option<usize>,
    /// Replaces the first seed (the `PADA_SEED` variable).
    pub first_seed: Option<u64>,
}

impl Overrides {
    /// Reads `PADA_SEED` from the process environment.
    pub fn with_env_seed(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var("PADA_SEED") {
            let seed = v
                .trim()
                .parse()
                .map_err(|_| PadaError::InvalidConfig(format!("PADA_SEED must be an unsigned integer, got {v:?}")))?;
            self.first_seed = Some(seed);
        }
        Ok(self)
    }
}

/// Parses a comma-separated seed list such as `0,1,2`.
pub fn parse_seed_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| PadaError::InvalidConfig(format!("bad seed {p:?} in {s:?}")))
        })
        .collect()
}

impl ExperimentConfig {
    /// Parses a config document. Syntax and schema errors carry the line
    /// and column of the offending token.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            PadaError::InvalidConfig(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
        })
    }

    /// Reads, parses and validates `path`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PadaError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json_str(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(s) = &o.seeds {
            self.seeds = s.clone();
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(p) = o.parallel {
            self.parallel = p;
        }
        if let Some(seed) = o.first_seed {
            match self.seeds.first_mut() {
                Some(first) => *first = seed,
                None => self.seeds.push(seed),
            }
        }
        self.validate()
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm.unwrap_or(match self.mode {
            Mode::Tabular => Algorithm::Pada,
            Mode::Continuous => Algorithm::PadaDm,
        })
    }

    pub fn env_spec(&self) -> Result<EnvSpec> {
        self.env
            .map(EnvSpec::new)
            .ok_or_else(|| PadaError::InvalidConfig("continuous mode needs an `env`".into()))
    }

    pub fn tabular(&self) -> TabularSuiteConfig {
        self.tabular.clone().unwrap_or_default()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PadaError::InvalidConfig(m));
        if self.seeds.is_empty() {
            return bad("seeds must be nonempty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.parallel == 0 {
            return bad("parallel must be at least 1".into());
        }
        let alg = self.algorithm();
        if !alg.valid_for(self.mode) {
            return bad(format!("algorithm {} is not valid in {:?} mode", alg.name(), self.mode));
        }
        match self.mode {
            Mode::Continuous => {
                self.env_spec()?;
                self.perturbation.validate()?;
                self.cem.validate()?;
                let mut adapt = self.adapt.clone();
                adapt.distill |= alg == Algorithm::PadaDmDistill;
                adapt.validate()?;
                if self.source_model.triples == 0 {
                    return bad("source_model.triples must be positive".into());
                }
            }
            Mode::Tabular => {
                let t = self.tabular();
                if t.iterations == 0 || t.samples_per_iteration == 0 {
                    return bad("tabular.iterations and tabular.samples_per_iteration must be positive".into());
                }
                if !(t.smoothing >= 0.0) {
                    return bad("tabular.smoothing must be nonnegative".into());
                }
                if t.lemma_states == 0 || t.lemma_horizon == 0 {
                    return bad("tabular.lemma_states and tabular.lemma_horizon must be positive".into());
                }
                if let TabularInstanceRef::Files { source, target, .. } = &t.instance {
                    for p in [source, target] {
                        let full = self.resolve(p);
                        if !full.is_file() {
                            return bad(format!("referenced file {} does not exist", full.display()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the resolved config's canonical JSON.
    pub fn content_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
