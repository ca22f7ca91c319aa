//! Shared abstractions: distributions, divergences, reproducible random
//! streams, and episode execution.

pub mod prob;
pub mod rng;
pub mod rollout;

pub use prob::{kl_divergence, tv_distance, DiscreteDistribution};
pub use rng::RngStream;
pub use rollout::{episodic_return, rollout, Environment, Policy, Trajectory};
