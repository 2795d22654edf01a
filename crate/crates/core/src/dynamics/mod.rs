//! Update engines and the trajectory runner.
//!
//! A run is strictly sequential: the state after step `t` depends on the
//! state after step `t - 1`, and every activated buyer reads the prices of
//! the current step. Independent runs share only the immutable market.

mod runner;
mod schedule;
mod update;

pub use runner::{
    default_initial_bids, run_dynamics, DynamicsConfig, Reference, Trajectory, TrajectoryPoint, UpdateRule,
};
pub use schedule::{
    make_random_order_schedule, make_random_subset_schedule, make_round_robin_schedule, make_synchronous_schedule,
    validate_liveness, ActivationSchedule,
};
pub use update::{
    best_response, best_response_detail, br_step, prd_step, prd_step_in_place, water_level, BestResponse, WaterLevel,
};
