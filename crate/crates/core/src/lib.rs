//! Policy adaptation with data aggregation.
//!
//! Two engines share this crate:
//!
//! * [`tabular`] runs the adaptation loop exactly on finite MDPs, with
//!   enumeration oracles for trajectory distributions, the step-wise
//!   divergence bound, and follow-the-leader regret.
//! * [`adapt`] runs the deviation-model variant on perturbed continuous
//!   control tasks from [`envs`], planning one step ahead with the
//!   cross-entropy method in [`planner`] over networks from [`nn`].
//!
//! [`experiment`] wires both engines to JSON configs and CSV logs, and
//! [`verify`] holds the acceptance checks behind `pada verify`.

pub mod adapt;
pub mod common;
pub mod envs;
pub mod error;
pub mod experiment;
pub mod nn;
pub mod planner;
pub mod tabular;
pub mod verify;

pub use error::{PadaError, Result};
