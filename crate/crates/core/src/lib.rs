//! Risk-distributing trajectory planning for automated vehicles.
//!
//! Candidate ego trajectories are sampled in a road-aligned frame, every
//! road user is assigned a collision risk per candidate, and the executed
//! candidate is chosen by validity level and a weighted combination of
//! Bayes, equality, maximin and responsibility costs. A deterministic
//! closed-loop simulator and a batch harness compare planner profiles.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod ethics;
pub mod evaluation;
pub mod frenet;
pub mod geometry;
pub mod planner;
pub mod prediction;
pub mod responsibility;
pub mod risk;
pub mod scenario;
pub mod simulator;

pub use config::PlannerConfig;
pub use error::{Error, Result};
pub use ethics::{EthicsConfig, Profile, ValidityLevel};
pub use planner::{Planner, PlanningCycle};
pub use scenario::{load_scenario, Scenario};
pub use simulator::{run, SimulationLog};
