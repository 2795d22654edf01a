use std::fmt;

use super::genericity::{genericity_check_with, GenericityVerdict};
use super::verify::{verify_equilibrium, EquilibriumCertificate};
use crate::dynamics::{
    default_initial_bids, make_random_order_schedule, make_synchronous_schedule, run_dynamics, DynamicsConfig,
    Trajectory, UpdateRule,
};
use crate::market::MarketInstance;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    /// Residual and price-agreement tolerance. Each dynamic first runs until
    /// a full window changes no bid by more than `tol / 10`; the threshold
    /// shrinks by 100x per retry while an endpoint fails verification.
    pub tol: f64,
    /// Seeds the random visiting order of the best-response run.
    pub seed: u64,
    pub prd_max_steps: usize,
    pub br_max_steps: usize,
    /// Largest subset size examined by the genericity diagnostic.
    pub genericity_subset_size: usize,
    pub genericity_max_enumerated: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            tol: 1e-6,
            seed: 0,
            prd_max_steps: 1_000_000,
            br_max_steps: 200_000,
            genericity_subset_size: 6,
            genericity_max_enumerated: 200_000,
        }
    }
}

/// Why the oracle gave up, with whatever the two dynamics produced.
#[derive(Debug)]
pub struct OracleFailure {
    pub reason: String,
    pub prd: Option<Trajectory>,
    pub br: Option<Trajectory>,
}

impl fmt::Display for OracleFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.reason)
    }
}

/// Computes an equilibrium with default step budgets.
pub fn compute_equilibrium(market: &MarketInstance, tol: f64, seed: u64) -> Result<EquilibriumCertificate> {
    compute_equilibrium_with(
        market,
        &OracleConfig {
            tol,
            seed,
            ..OracleConfig::default()
        },
    )
}

/// Runs synchronous PRD and sequential best-response dynamics from uniform
/// bids and cross-checks them: both endpoints must pass
/// [`verify_equilibrium`] at `tol` and agree in prices within `tol`. The
/// best-response endpoint becomes the certificate.
pub fn compute_equilibrium_with(market: &MarketInstance, config: &OracleConfig) -> Result<EquilibriumCertificate> {
    if !(config.tol > 0.0) {
        return Err(Error::Config("oracle tolerance must be positive".into()));
    }
    let market_report = crate::market::validate_market(market);
    if !market_report.is_valid() {
        return Err(Error::Validation(market_report.to_string()));
    }
    let b0 = default_initial_bids(market);
    let n = market.n();
    let prd_schedule = make_synchronous_schedule(n);
    let br_schedule = make_random_order_schedule(n, config.br_max_steps, config.seed);
    let verdict = genericity_check_with(market, config.genericity_subset_size, config.genericity_max_enumerated);

    // Off-support bids under PRD decay geometrically, so a small window
    // change can still leave them above the support threshold. The stop
    // rule is tightened until both endpoints verify; only the first round
    // is required to converge.
    let mut stop = config.tol / 10.0;
    for round in 0.. {
        let run = |rule: UpdateRule, max_steps: usize, schedule| {
            let cfg = DynamicsConfig {
                rule,
                max_steps,
                tolerance: stop,
                record_every: (max_steps / 100).max(1),
                ..DynamicsConfig::default()
            };
            run_dynamics(market, &b0, schedule, &cfg, None)
        };
        let prd = run(UpdateRule::ProportionalResponse, config.prd_max_steps, &prd_schedule)?;
        let br = run(UpdateRule::BestResponse, config.br_max_steps, &br_schedule)?;
        let fail = |reason: String, prd: Trajectory, br: Trajectory| {
            Err(Error::Oracle(Box::new(OracleFailure {
                reason,
                prd: Some(prd),
                br: Some(br),
            })))
        };
        if round == 0 && (!prd.converged || !br.converged) {
            let reason = format!(
                "no convergence within the step budget at stop tolerance {stop:e} \
                 (prd: {:e} after {} steps, br: {:e} after {} steps)",
                prd.last_window_bid_change, prd.steps_run, br.last_window_bid_change, br.steps_run
            );
            return fail(reason, prd, br);
        }

        let prd_cert = verify_equilibrium(&prd.final_bids, market, config.tol)?;
        let mut cert = verify_equilibrium(&br.final_bids, market, config.tol)?;
        let gap = prd_cert.prices.max_abs_diff(&cert.prices);
        cert.set_cross_check(gap <= config.tol, Some(verdict.clone()));
        if prd_cert.accepted && cert.accepted {
            return Ok(cert);
        }
        // Refinement rounds that exhaust the budget without verifying end
        // the search.
        if stop < MIN_STOP || !prd.converged || !br.converged {
            let reason = format!(
                "endpoints rejected (prd residual {:e}, br residual {:e}, price gap {gap:e})",
                prd_cert.residuals.max(),
                cert.residuals.max()
            );
            return fail(reason, prd, br);
        }
        stop /= 100.0;
    }
    unreachable!("the refinement loop returns")
}

/// Tightest stop tolerance the oracle tries before giving up.
const MIN_STOP: f64 = 1e-14;

impl EquilibriumCertificate {
    /// Distances to a certificate of a market not known to be generic only
    /// bound the distance to the equilibrium set from above.
    pub fn is_generic(&self) -> bool {
        matches!(self.generic_verdict, Some(GenericityVerdict::Generic))
    }
}
