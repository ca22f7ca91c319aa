//! JSON-configured experiment driver behind the `pada` binary.

pub mod config;
pub mod continuous;
pub mod tabular;

pub use config::{parse_seed_list, Algorithm, ExperimentConfig, Mode, Overrides, SourceModelConfig, TabularSuiteConfig};
pub use continuous::{build_source_model, run_experiment, RunSummary, SeedStatus, SeedSummary, THRESHOLD_FRACTION};
pub use tabular::{run_tabular_suite, TabularSuiteSummary};
