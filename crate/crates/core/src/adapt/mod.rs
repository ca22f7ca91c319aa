//! Deviation-model adaptation on continuous tasks, plus the
//! inverse-dynamics baseline.

pub mod accuracy;
pub mod buffer;
pub mod deviation;
pub mod distill;
pub mod idm;
pub mod policy;
pub mod run;

pub use accuracy::{accuracy_report_with, deviation_accuracy_report, least_squares_slope, DeviationAccuracyReport, DeviationPair};
pub use buffer::{ReplayBuffer, TransitionTriple};
pub use deviation::{deviation_objective, deviation_training_step, DeviationModel};
pub use distill::{distill_target_policy, DistillConfig};
pub use idm::{idm_baseline_run, IdmOutcome, InverseDynamics};
pub use policy::{MlpPolicy, RegressionData};
pub use run::{
    evaluate_actor, evaluate_source_policy, pada_dm_run, run_loop, run_loop_logged, source_only_run, AdaptRunConfig, CurveRow, EvalStats,
    Learner, LearningCurve, LoopContext, LoopOutcome, PadaDm, PadaDmOutcome, SourceOnly,
};
