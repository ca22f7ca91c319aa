use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PadaError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// KL divergence with `q_i = 0` where `p_i > 0`.
    #[error("infinite divergence at outcome {index}")]
    InfiniteDivergence { index: usize },

    #[error("too large to enumerate: {n_states}^{horizon} trajectories exceeds {limit}")]
    TooLargeToEnumerate {
        n_states: usize,
        horizon: usize,
        limit: u64,
    },

    #[error("action out of space at dimension {dim}: {value}")]
    ActionOutOfSpace { dim: usize, value: f64 },

    #[error("dynamics diverged")]
    DynamicsDiverged,

    #[error("training diverged at sgd step {step}")]
    TrainingDiverged { step: u64 },

    #[error("degenerate action box at dimension {dim}: [{low}, {high}]")]
    DegenerateBox { dim: usize, low: f64, high: f64 },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("empty replay buffer")]
    EmptyBuffer,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PadaError {
    fn from(e: std::io::Error) -> Self {
        PadaError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PadaError>;
