//! Road-aligned frame, candidate sampling and comfort/mobility costs.

mod cost;
mod frame;
mod polynomial;
mod sampling;

pub use cost::{best_progress, comfort_cost, mobility_cost, ComfortCost, MobilityCost};
pub use frame::{build_frame, CartesianState, FrenetFrame, FrenetState, RefPoint};
pub use polynomial::{Motion, TimePolynomial};
pub use sampling::{
    sample_trajectories, Corridor, EndConditions, EndStateGrid, Infeasibility, SamplingConfig,
    SamplingSetup, TrajectorySample, TrajectoryState,
};
