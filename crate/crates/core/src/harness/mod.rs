//! Experiment plumbing: configuration, ensembles, file formats and the CLI.

pub mod cli;
pub mod config;
pub mod ensemble;
pub mod io;
pub mod report;

pub use cli::cli_dispatch;
pub use config::{ExperimentConfig, MarketSpec, ScheduleKind, ScheduleSpec};
pub use ensemble::{run_ensemble, run_ensemble_with, AggregateRow, EnsembleSummary, RunSummary};
