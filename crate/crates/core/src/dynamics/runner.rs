use serde::{Deserialize, Serialize};

use super::schedule::ActivationSchedule;
use super::update::{best_response, prd_step_in_place};
use crate::market::{nsw_from_utilities, prices_of, utilities_of, BidProfile, MarketInstance, PriceVector};
use crate::potential::potential;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateRule {
    #[serde(rename = "prd", alias = "proportional-response")]
    ProportionalResponse,
    #[serde(rename = "br", alias = "best-response")]
    BestResponse,
}

impl std::str::FromStr for UpdateRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prd" | "proportional-response" => Ok(UpdateRule::ProportionalResponse),
            "br" | "best-response" => Ok(UpdateRule::BestResponse),
            other => Err(Error::Config(format!("unknown update rule `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsConfig {
    pub rule: UpdateRule,
    pub max_steps: usize,
    /// Stop once the max-norm bid change across one liveness window is at
    /// most this.
    pub tolerance: f64,
    pub record_every: usize,
    /// Keep a copy of the bids every this many recorded points.
    pub snapshot_every: Option<usize>,
    /// Price error (max-norm, against the reference) that counts as settled.
    pub settle_tolerance: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            rule: UpdateRule::ProportionalResponse,
            max_steps: 100_000,
            tolerance: 1e-9,
            record_every: 1,
            snapshot_every: None,
            settle_tolerance: 1e-6,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if self.record_every == 0 || self.snapshot_every == Some(0) {
            return Err(Error::Config("record_every and snapshot_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Equilibrium point the runner measures distances against.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub bids: BidProfile,
    pub prices: PriceVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub prices: Vec<f64>,
    pub potential: f64,
    pub nsw: f64,
    pub utilities: Vec<f64>,
    /// Frobenius distance of the bids to the reference bids.
    pub distance: Option<f64>,
    /// Max-norm distance of the prices to the reference prices.
    pub price_error: Option<f64>,
    pub bids: Option<BidProfile>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub rule: UpdateRule,
    pub points: Vec<TrajectoryPoint>,
    pub final_bids: BidProfile,
    pub steps_run: usize,
    /// Steps per convergence window (the schedule's liveness bound, or `n`).
    pub window: usize,
    /// Set when a full window moved no bid by more than the tolerance.
    pub converged: bool,
    pub converged_at: Option<usize>,
    /// Same test applied to prices only. Prices are unique at equilibrium
    /// even when bids are not.
    pub prices_converged: bool,
    pub last_window_bid_change: f64,
    pub last_window_price_change: f64,
    /// First step from which the price error stays within
    /// `settle_tolerance` through the end of the run.
    pub settled_at: Option<usize>,
}

impl Trajectory {
    pub fn final_point(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory always records the initial point")
    }
}

/// `B_i / |support_i|` on each buyer's positive-valuation support.
pub fn default_initial_bids(market: &MarketInstance) -> BidProfile {
    let mut b = BidProfile::zeros(market.n(), market.m());
    for i in 0..market.n() {
        let support: Vec<usize> = market.support(i).collect();
        let share = market.budget(i) / support.len() as f64;
        for j in support {
            b.set(i, j, share);
        }
    }
    b
}

fn record(
    t: usize,
    b: &BidProfile,
    market: &MarketInstance,
    reference: Option<&Reference>,
    keep_bids: bool,
) -> Result<TrajectoryPoint> {
    let p = prices_of(b);
    let utilities = utilities_of(b, &p, market);
    let nsw = nsw_from_utilities(&utilities, market.budgets()).value;
    Ok(TrajectoryPoint {
        t,
        potential: potential(b, market)?,
        nsw,
        utilities,
        distance: reference.map(|r| crate::equilibrium::distance_to_profile(b, &r.bids)).transpose()?,
        price_error: reference.map(|r| p.max_abs_diff(&r.prices)),
        prices: p.0,
        bids: keep_bids.then(|| b.clone()),
    })
}

/// Runs the configured update over the schedule, starting from `b0`.
///
/// The run ends at `max_steps`, at the end of the schedule, or once a full
/// liveness window changes no bid by more than `config.tolerance`.
pub fn run_dynamics(
    market: &MarketInstance,
    b0: &BidProfile,
    schedule: &ActivationSchedule,
    config: &DynamicsConfig,
    reference: Option<&Reference>,
) -> Result<Trajectory> {
    config.validate()?;
    b0.check(market)?;
    for i in 0..market.n() {
        if let Some(j) = market.support(i).find(|&j| b0.get(i, j) <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "initial bid b[{i}][{j}] must be positive on a valued good"
            )));
        }
    }
    if schedule.n() != market.n() {
        return Err(Error::DimensionMismatch(format!(
            "schedule has {} buyers, market has {}",
            schedule.n(),
            market.n()
        )));
    }
    if let Some(r) = reference {
        r.bids.check_dims(market)?;
    }
    let horizon = schedule.horizon().map_or(config.max_steps, |len| len.min(config.max_steps));
    if config.rule == UpdateRule::BestResponse {
        if let Some(t) = (0..horizon.min(schedule.len())).find(|&t| schedule.step(t).len() != 1) {
            return Err(Error::Config(format!(
                "best-response dynamics need one buyer per step; step {t} activates {}",
                schedule.step(t).len()
            )));
        }
    }

    let window = schedule.liveness().unwrap_or(market.n()).max(1);
    let snapshot_every = config.snapshot_every;
    let mut recorded = 0usize;
    let keep = |recorded: &mut usize| {
        let k = snapshot_every.is_some_and(|every| (*recorded).is_multiple_of(every));
        *recorded += 1;
        k
    };

    let mut b = b0.clone();
    let mut points = vec![record(0, &b, market, reference, keep(&mut recorded))?];
    let mut window_start = b.clone();
    let mut window_prices = prices_of(&b);
    let (mut converged, mut prices_converged) = (false, false);
    let (mut last_bid_change, mut last_price_change) = (f64::INFINITY, f64::INFINITY);
    let mut last_unsettled: Option<usize> = None;
    let settle = |b: &BidProfile| reference.map(|r| prices_of(b).max_abs_diff(&r.prices) > config.settle_tolerance);
    if settle(&b) == Some(true) {
        last_unsettled = Some(0);
    }

    let mut t = 0;
    while t < horizon {
        let subset = schedule.step(t);
        match config.rule {
            UpdateRule::ProportionalResponse => prd_step_in_place(&mut b, subset, market)?,
            UpdateRule::BestResponse => {
                let i = subset[0];
                let row = best_response(i, &b, market)?;
                b.row_mut(i).copy_from_slice(&row);
            }
        }
        t += 1;
        if settle(&b) == Some(true) {
            last_unsettled = Some(t);
        }
        if t % config.record_every == 0 {
            points.push(record(t, &b, market, reference, keep(&mut recorded))?);
        }
        if t % window == 0 {
            let p = prices_of(&b);
            last_bid_change = b.max_abs_diff(&window_start);
            last_price_change = p.max_abs_diff(&window_prices);
            prices_converged = last_price_change <= config.tolerance;
            if last_bid_change <= config.tolerance {
                converged = true;
                break;
            }
            window_start.clone_from(&b);
            window_prices = p;
        }
    }
    if points.last().map(|p| p.t) != Some(t) {
        points.push(record(t, &b, market, reference, keep(&mut recorded))?);
    }
    let settled_at = reference.map(|_| last_unsettled.map_or(0, |s| s + 1)).filter(|&s| s <= t);

    Ok(Trajectory {
        rule: config.rule,
        points,
        final_bids: b,
        steps_run: t,
        window,
        converged,
        converged_at: converged.then_some(t),
        prices_converged: prices_converged || converged,
        last_window_bid_change: last_bid_change,
        last_window_price_change: last_price_change,
        settled_at,
    })
}
