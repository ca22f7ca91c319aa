//! Small rectifier networks trained with plain SGD.

pub mod checkpoint;
pub mod gradcheck;
pub mod mlp;
pub mod pretrain;
pub mod sgd;

pub use gradcheck::{finite_difference_check, GradCheck};
pub use mlp::{grad, Layer, Loss, Minibatch, Mlp, MlpGradients, Normalizer, HIDDEN_WIDTH};
pub use pretrain::{pretrain_source_model, PretrainConfig, SourceModel};
pub use sgd::{polyak_blend, sgd_step, SgdSchedule, ADAPT_LR};
