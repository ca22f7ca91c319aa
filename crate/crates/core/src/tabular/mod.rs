//! Exact adaptation on finite MDPs.
//!
//! Everything here is computed either by closed-form dynamic programming or
//! by full enumeration, so the convergence claims of the adaptation loop can
//! be checked to machine precision.

pub mod exact;
pub mod generate;
pub mod mdp;
pub mod model;
pub mod run;

pub use exact::{
    adaptability_report, exact_state_distribution, exact_trajectory_distribution, trajectory_gap,
    verify_divergence_lemma, AdaptabilityReport, DivergenceCheck, MarkovChain, StateDistributions,
};
pub use mdp::{TabularMdp, TabularPolicy};
pub use model::{ftl_mle_update, greedy_adapted_policy, TabularDynamicsModel};
pub use run::{
    ftl_regret_curve, pada_tabular, CollectionMode, IterationRecord, PadaTabularConfig, TabularRun,
    TabularRunReport,
};
