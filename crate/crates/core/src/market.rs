//! Market data model and the trading-post mechanism.
//!
//! Matrices are stored row-major in flat `Vec<f64>`s (row `i` is buyer `i`).
//! Every reduction runs in a fixed order so that trajectories are
//! bit-reproducible.

use std::fmt;
use std::ops::Deref;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance for normalization of market inputs.
pub const INPUT_TOL: f64 = 1e-12;
/// Tolerance for quantities derived from bids (prices, budgets, clearing).
pub const DERIVED_TOL: f64 = 1e-10;

/// Budgets `B` and valuations `A` of a linear Fisher market with unit supply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MarketFile", into = "MarketFile")]
pub struct MarketInstance {
    n: usize,
    m: usize,
    budgets: Vec<f64>,
    valuations: Vec<f64>,
}

/// On-disk layout of a market.
#[derive(Serialize, Deserialize)]
struct MarketFile {
    n: usize,
    m: usize,
    budgets: Vec<f64>,
    valuations: Vec<Vec<f64>>,
}

impl TryFrom<MarketFile> for MarketInstance {
    type Error = Error;

    fn try_from(file: MarketFile) -> Result<Self> {
        let market = MarketInstance::new(file.budgets, file.valuations)?;
        if market.n != file.n || market.m != file.m {
            return Err(Error::DimensionMismatch(format!(
                "declared {}x{} but data is {}x{}",
                file.n, file.m, market.n, market.m
            )));
        }
        Ok(market)
    }
}

impl From<MarketInstance> for MarketFile {
    fn from(market: MarketInstance) -> Self {
        MarketFile {
            n: market.n,
            m: market.m,
            valuations: market.valuations.chunks(market.m).map(<[f64]>::to_vec).collect(),
            budgets: market.budgets,
        }
    }
}

impl MarketInstance {
    /// Builds a market from budgets and valuation rows. Only the shape is
    /// checked here; use [`validate_market`] for the economic invariants.
    pub fn new(budgets: Vec<f64>, valuations: Vec<Vec<f64>>) -> Result<Self> {
        let n = budgets.len();
        if valuations.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} budgets but {} valuation rows",
                valuations.len()
            )));
        }
        let m = valuations.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("market needs at least one buyer and one good".into()));
        }
        if let Some(i) = valuations.iter().position(|row| row.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "valuation row {i} has {} entries, expected {m}",
                valuations[i].len()
            )));
        }
        Ok(MarketInstance {
            n,
            m,
            budgets,
            valuations: valuations.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    pub fn budget(&self, i: usize) -> f64 {
        self.budgets[i]
    }

    pub fn valuation(&self, i: usize, j: usize) -> f64 {
        self.valuations[i * self.m + j]
    }

    pub fn valuation_row(&self, i: usize) -> &[f64] {
        &self.valuations[i * self.m..(i + 1) * self.m]
    }

    /// Row-major valuation matrix.
    pub fn valuations(&self) -> &[f64] {
        &self.valuations
    }

    /// Goods buyer `i` values strictly positively.
    pub fn support(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.valuation_row(i)
            .iter()
            .enumerate()
            .filter(|(_, &a)| a > 0.0)
            .map(|(j, _)| j)
    }

    /// Returns the market if [`validate_market`] reports no violations.
    pub fn validated(self) -> Result<Self> {
        let report = validate_market(&self);
        if report.is_valid() {
            Ok(self)
        } else {
            Err(Error::Validation(report.to_string()))
        }
    }

    fn check_buyer(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        Ok(())
    }
}

/// Bid matrix `b`, one row per buyer. Serialized as an array of rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct BidProfile {
    n: usize,
    m: usize,
    bids: Vec<f64>,
}

impl BidProfile {
    pub fn from_flat(n: usize, m: usize, bids: Vec<f64>) -> Result<Self> {
        if bids.len() != n * m {
            return Err(Error::DimensionMismatch(format!(
                "{} bids for a {n}x{m} profile",
                bids.len()
            )));
        }
        Ok(BidProfile { n, m, bids })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged bid rows".into()));
        }
        Self::from_flat(n, m, rows.into_iter().flatten().collect())
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        BidProfile {
            n,
            m,
            bids: vec![0.0; n * m],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.bids[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.bids[i * self.m + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.bids[i * self.m..(i + 1) * self.m]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.bids[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.bids.chunks(self.m.max(1))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.bids
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &BidProfile) -> f64 {
        self.bids
            .iter()
            .zip(&other.bids)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn check_dims(&self, market: &MarketInstance) -> Result<()> {
        if self.n != market.n || self.m != market.m {
            return Err(Error::DimensionMismatch(format!(
                "bids are {}x{}, market is {}x{}",
                self.n, self.m, market.n, market.m
            )));
        }
        Ok(())
    }

    /// Checks feasibility: non-negative, rows sum to `B_i` within
    /// [`DERIVED_TOL`], no money on zero-valued goods.
    pub fn check(&self, market: &MarketInstance) -> Result<()> {
        self.check_dims(market)?;
        for i in 0..self.n {
            let row = self.row(i);
            let mut sum = 0.0;
            for (j, &b) in row.iter().enumerate() {
                if !(b >= 0.0) || !b.is_finite() {
                    return Err(Error::InvalidInput(format!("bid b[{i}][{j}] = {b} is not a finite non-negative number")));
                }
                if b > 0.0 && market.valuation(i, j) == 0.0 {
                    return Err(Error::InvalidBid { buyer: i, good: j, bid: b });
                }
                sum += b;
            }
            if (sum - market.budget(i)).abs() > DERIVED_TOL {
                return Err(Error::InvalidInput(format!(
                    "bids of buyer {i} sum to {sum}, budget is {}",
                    market.budget(i)
                )));
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<Vec<f64>>> for BidProfile {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        BidProfile::from_rows(rows)
    }
}

impl From<BidProfile> for Vec<Vec<f64>> {
    fn from(b: BidProfile) -> Self {
        b.to_rows()
    }
}

/// Prices `p_j`, the total money bid on each good.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriceVector(pub Vec<f64>);

impl Deref for PriceVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl PriceVector {
    pub fn max_abs_diff(&self, other: &PriceVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Shares `x_ij` of each unit-supply good.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    n: usize,
    m: usize,
    shares: Vec<f64>,
}

impl Allocation {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let b = BidProfile::from_rows(rows)?;
        Ok(Allocation {
            n: b.n,
            m: b.m,
            shares: b.bids,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.shares[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.shares[i * self.m..(i + 1) * self.m]
    }
}

/// `p_j = sum_i b_ij`, accumulated in row-major order.
pub fn compute_prices(b: &BidProfile, market: &MarketInstance) -> Result<PriceVector> {
    b.check_dims(market)?;
    Ok(prices_of(b))
}

pub(crate) fn prices_of(b: &BidProfile) -> PriceVector {
    let mut p = vec![0.0; b.m];
    for row in b.rows() {
        for (pj, &bij) in p.iter_mut().zip(row) {
            *pj += bij;
        }
    }
    PriceVector(p)
}

/// Proportional split: `x_ij = b_ij / p_j` when `b_ij > 0`, else 0.
pub fn allocate(b: &BidProfile, p: &PriceVector) -> Result<Allocation> {
    if p.len() != b.m {
        return Err(Error::DimensionMismatch(format!("{} prices for {} goods", p.len(), b.m)));
    }
    let shares = b
        .rows()
        .flat_map(|row| row.iter().zip(p.iter()).map(|(&bij, &pj)| if bij > 0.0 { bij / pj } else { 0.0 }))
        .collect();
    Ok(Allocation {
        n: b.n,
        m: b.m,
        shares,
    })
}

/// `u_i = sum_j a_ij x_ij`.
pub fn buyer_utility(i: usize, x: &Allocation, market: &MarketInstance) -> Result<f64> {
    market.check_buyer(i)?;
    if x.n != market.n || x.m != market.m {
        return Err(Error::DimensionMismatch("allocation does not match market".into()));
    }
    Ok(dot(market.valuation_row(i), x.row(i)))
}

/// Utilities of every buyer straight from bids and prices.
pub(crate) fn utilities_of(b: &BidProfile, p: &[f64], market: &MarketInstance) -> Vec<f64> {
    (0..b.n).map(|i| row_utility(market.valuation_row(i), b.row(i), p)).collect()
}

pub(crate) fn row_utility(a: &[f64], bids: &[f64], p: &[f64]) -> f64 {
    let mut u = 0.0;
    for ((&aij, &bij), &pj) in a.iter().zip(bids).zip(p) {
        if bij > 0.0 {
            u += aij * bij / pj;
        }
    }
    u
}

/// Utilities of every buyer under profile `b`.
pub fn utilities(b: &BidProfile, market: &MarketInstance) -> Result<Vec<f64>> {
    let p = compute_prices(b, market)?;
    Ok(utilities_of(b, &p, market))
}

/// Bang-per-buck `a_ij / p_j`.
pub fn bang_per_buck(i: usize, j: usize, p: &PriceVector, market: &MarketInstance) -> Result<f64> {
    market.check_buyer(i)?;
    if j >= market.m || p.len() != market.m {
        return Err(Error::IndexOutOfRange { index: j, len: market.m.min(p.len()) });
    }
    if p[j] <= 0.0 {
        return Err(Error::UndefinedRatio { good: j });
    }
    Ok(market.valuation(i, j) / p[j])
}

/// Nash social welfare `prod_i u_i^{B_i}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nsw {
    pub value: f64,
    /// Set when some buyer has zero utility; `value` is then 0.
    pub degenerate: bool,
}

pub fn nash_social_welfare(x: &Allocation, market: &MarketInstance) -> Result<Nsw> {
    if x.n != market.n || x.m != market.m {
        return Err(Error::DimensionMismatch("allocation does not match market".into()));
    }
    let u: Vec<f64> = (0..market.n).map(|i| dot(market.valuation_row(i), x.row(i))).collect();
    Ok(nsw_from_utilities(&u, market.budgets()))
}

pub(crate) fn nsw_from_utilities(u: &[f64], budgets: &[f64]) -> Nsw {
    let mut log = 0.0;
    for (&ui, &bi) in u.iter().zip(budgets) {
        if !(ui > 0.0) {
            return Nsw {
                value: 0.0,
                degenerate: true,
            };
        }
        log += bi * ui.ln();
    }
    Nsw {
        value: log.exp(),
        degenerate: false,
    }
}

/// Samples valuations and budgets i.i.d. uniform on (0, 1) and normalizes
/// each valuation row and the budget vector to sum to one.
pub fn generate_random_market(n: usize, m: usize, seed: u64) -> MarketInstance {
    assert!(n >= 1 && m >= 1, "market needs at least one buyer and one good");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut valuations = Vec::with_capacity(n * m);
    for _ in 0..n {
        let row: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Open01)).collect();
        valuations.extend(normalized(&row));
    }
    let budgets: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Open01)).collect();
    MarketInstance {
        n,
        m,
        budgets: normalized(&budgets),
        valuations,
    }
}

/// Scales `v` to sum to one. A one-element vector maps to exactly `[1.0]`.
pub(crate) fn normalized(v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter().map(|x| x / total).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonFinite,
    NegativeBudget { buyer: usize },
    BudgetSum { sum: f64 },
    NegativeValuation { buyer: usize, good: usize },
    ValuationRowSum { buyer: usize, sum: f64 },
    DeadBuyer { buyer: usize },
    DeadGood { good: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite => write!(f, "non-finite budget or valuation"),
            Violation::NegativeBudget { buyer } => write!(f, "buyer {buyer} has a non-positive budget"),
            Violation::BudgetSum { sum } => write!(f, "budgets sum to {sum}, expected 1"),
            Violation::NegativeValuation { buyer, good } => {
                write!(f, "valuation a[{buyer}][{good}] is negative")
            }
            Violation::ValuationRowSum { buyer, sum } => {
                write!(f, "valuations of buyer {buyer} sum to {sum}, expected 1")
            }
            Violation::DeadBuyer { buyer } => write!(f, "buyer {buyer} values no good"),
            Violation::DeadGood { good } => write!(f, "good {good} is valued by no buyer"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Warning {
    /// The buyer values only `good` and nobody else values it, so at any
    /// fixed point the buyer alone sets its price to `B_i`.
    DegenerateCompetition { buyer: usize, good: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DegenerateCompetition { buyer, good } => {
                write!(f, "buyer {buyer} is the sole bidder on its only good {good}")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        if parts.is_empty() {
            write!(f, "valid")
        } else {
            write!(f, "{}", parts.join("; "))
        }
    }
}

/// Reports every violated market invariant. The report is empty iff the
/// market is valid; warnings do not affect validity.
pub fn validate_market(market: &MarketInstance) -> ValidationReport {
    let mut report = ValidationReport::default();
    if market.budgets.iter().chain(&market.valuations).any(|x| !x.is_finite()) {
        report.violations.push(Violation::NonFinite);
        return report;
    }
    for (i, &b) in market.budgets.iter().enumerate() {
        if b <= 0.0 {
            report.violations.push(Violation::NegativeBudget { buyer: i });
        }
    }
    let sum: f64 = market.budgets.iter().sum();
    if (sum - 1.0).abs() > INPUT_TOL {
        report.violations.push(Violation::BudgetSum { sum });
    }
    for i in 0..market.n {
        let row = market.valuation_row(i);
        for (j, &a) in row.iter().enumerate() {
            if a < 0.0 {
                report.violations.push(Violation::NegativeValuation { buyer: i, good: j });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > INPUT_TOL {
            report.violations.push(Violation::ValuationRowSum { buyer: i, sum });
        }
        if !row.iter().any(|&a| a > 0.0) {
            report.violations.push(Violation::DeadBuyer { buyer: i });
        }
    }
    let interested = |j: usize| (0..market.n).filter(move |&i| market.valuation(i, j) > 0.0);
    for j in 0..market.m {
        if interested(j).next().is_none() {
            report.violations.push(Violation::DeadGood { good: j });
        }
    }
    for i in 0..market.n {
        let mut support = market.support(i);
        if let (Some(j), None) = (support.next(), support.next()) {
            if interested(j).count() == 1 {
                report.warnings.push(Warning::DegenerateCompetition { buyer: i, good: j });
            }
        }
    }
    report
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sym2() -> MarketInstance {
        MarketInstance::new(vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap()
    }

    fn bids(rows: &[&[f64]]) -> BidProfile {
        BidProfile::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn prices_are_column_sums() {
        let one = MarketInstance::new(vec![0.4, 0.6], vec![vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(compute_prices(&bids(&[&[0.4], &[0.6]]), &one).unwrap().0, vec![1.0]);

        let p = compute_prices(&bids(&[&[0.25, 0.25], &[0.25, 0.25]]), &sym2()).unwrap();
        assert_eq!(p.0, vec![0.5, 0.5]);

        let p = compute_prices(&bids(&[&[0.42, 0.08], &[0.10, 0.40]]), &sym2()).unwrap();
        assert!((p[0] - 0.52).abs() < 1e-15 && (p[1] - 0.48).abs() < 1e-15);
    }

    #[test]
    fn prices_reject_wrong_shape() {
        let err = compute_prices(&bids(&[&[1.0]]), &sym2()).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn allocation_cases() {
        let b = bids(&[&[0.4], &[0.6]]);
        let x = allocate(&b, &PriceVector(vec![1.0])).unwrap();
        assert_eq!((x.get(0, 0), x.get(1, 0)), (0.4, 0.6));

        let b = bids(&[&[0.25, 0.25], &[0.25, 0.25]]);
        let x = allocate(&b, &prices_of(&b)).unwrap();
        assert!(x.shares.iter().all(|&s| s == 0.5));

        let b = bids(&[&[0.5, 0.0], &[0.25, 0.25]]);
        let x = allocate(&b, &prices_of(&b)).unwrap();
        assert_eq!(x.get(0, 1), 0.0);
        assert_eq!(x.get(1, 1), 1.0);
    }

    #[test]
    fn utility_examples() {
        let m = sym2();
        let x = Allocation::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!((buyer_utility(0, &x, &m).unwrap() - 0.5).abs() < 1e-15);
        let x = Allocation::from_rows(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(buyer_utility(0, &x, &m).unwrap(), 0.0);
        let x = Allocation::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(buyer_utility(0, &x, &m).unwrap(), 0.8);
        assert!(matches!(buyer_utility(2, &x, &m), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn bang_per_buck_examples() {
        let m = MarketInstance::new(vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.0, 1.0]]).unwrap();
        assert!((bang_per_buck(0, 0, &PriceVector(vec![0.5, 0.5]), &m).unwrap() - 1.6).abs() < 1e-15);
        assert_eq!(bang_per_buck(1, 0, &PriceVector(vec![0.5, 0.5]), &m).unwrap(), 0.0);
        let r = bang_per_buck(0, 1, &PriceVector(vec![0.82, 0.18]), &m).unwrap();
        assert!((r - 10.0 / 9.0).abs() < 1e-14);
        assert!(matches!(
            bang_per_buck(0, 1, &PriceVector(vec![1.0, 0.0]), &m),
            Err(Error::UndefinedRatio { good: 1 })
        ));
    }

    #[test]
    fn nsw_examples() {
        let m = sym2();
        let diag = Allocation::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((nash_social_welfare(&diag, &m).unwrap().value - 0.8).abs() < 1e-15);
        let uni = Allocation::from_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!((nash_social_welfare(&uni, &m).unwrap().value - 0.5).abs() < 1e-15);

        let single = MarketInstance::new(vec![1.0], vec![vec![0.3, 0.7]]).unwrap();
        let x = Allocation::from_rows(vec![vec![0.5, 1.0]]).unwrap();
        assert!((nash_social_welfare(&x, &single).unwrap().value - 0.85).abs() < 1e-15);

        let starved = Allocation::from_rows(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let nsw = nash_social_welfare(&starved, &m).unwrap();
        assert!(nsw.degenerate);
        assert_eq!(nsw.value, 0.0);
    }

    #[test]
    fn random_market_is_deterministic_and_valid() {
        let a = generate_random_market(10, 10, 7);
        assert_eq!(a, generate_random_market(10, 10, 7));
        assert_ne!(a, generate_random_market(10, 10, 8));
        assert_eq!((a.n(), a.m()), (10, 10));
        for seed in 0..200 {
            let mk = generate_random_market(1 + (seed as usize % 7), 1 + (seed as usize % 5), seed);
            assert!(validate_market(&mk).is_valid(), "seed {seed}");
        }
        let one = generate_random_market(1, 1, 99);
        assert_eq!(one.budgets(), &[1.0]);
        assert_eq!(one.valuations(), &[1.0]);
    }

    #[test]
    fn validation_reports() {
        assert!(validate_market(&sym2()).violations.is_empty());

        let rich = MarketInstance::new(vec![0.75, 0.75], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let report = validate_market(&rich);
        assert!(matches!(report.violations.as_slice(), [Violation::BudgetSum { .. }]));

        let dead = MarketInstance::new(vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let report = validate_market(&dead);
        assert_eq!(report.violations, vec![Violation::DeadGood { good: 1 }]);
        assert!(dead.validated().is_err());

        let lonely = MarketInstance::new(vec![0.5, 0.5], vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let report = validate_market(&lonely);
        assert!(report.is_valid());
        assert_eq!(report.warnings.len(), 2);
    }

    #[test]
    fn market_json_round_trip() {
        let m = generate_random_market(3, 4, 1);
        let text = serde_json::to_string(&m).unwrap();
        let back: MarketInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let bad = r#"{"n":2,"m":2,"budgets":[0.5,0.5],"valuations":[[1.0,0.0]]}"#;
        assert!(serde_json::from_str::<MarketInstance>(bad).is_err());
    }
}
