//! Equilibrium verification, the cross-validated oracle, support graphs and
//! the genericity diagnostic.

mod genericity;
mod graph;
mod oracle;
mod verify;

pub use genericity::{genericity_check, genericity_check_with, GenericityVerdict, DEFAULT_MAX_ENUMERATED};
pub use graph::{cycle_log_balance, find_cycle, support_graph, SupportGraph, Vertex, SUPPORT_THRESHOLD};
pub use oracle::{compute_equilibrium, compute_equilibrium_with, OracleConfig, OracleFailure};
pub use verify::{distance_to_profile, verify_equilibrium, EquilibriumCertificate, Residuals};
