//! Linear Fisher markets under the trading-post mechanism.
//!
//! The crate simulates asynchronous proportional response dynamics (PRD) and
//! best-response dynamics in the associated potential game, and ships an
//! equilibrium verification layer that checks the competitive-equilibrium
//! conditions directly.
//!
//! Module map:
//! - [`market`]: market data, trading-post prices/allocations, utilities, NSW.
//! - [`potential`]: the potential function, associated utilities, gradient,
//!   KL divergence and the linearized-potential decomposition.
//! - [`dynamics`]: PRD and best-response update rules, activation schedules
//!   and the trajectory runner.
//! - [`equilibrium`]: certificates, the cross-validated oracle, support
//!   graphs and the genericity diagnostic.
//! - [`harness`]: experiment configs, ensembles, CSV/JSON I/O and the CLI.

pub mod dynamics;
pub mod equilibrium;
mod error;
pub mod harness;
pub mod market;
pub mod parallel;
pub mod potential;

pub use error::{Error, Result};
pub use market::{Allocation, BidProfile, MarketInstance, PriceVector};
