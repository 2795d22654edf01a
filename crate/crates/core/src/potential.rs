//! The potential `Phi(b) = sum_ij b_ij ln a_ij + sum_j p_j (1 - ln p_j)` of
//! the associated game, the associated utilities, and the KL geometry that
//! relates PRD steps to the potential.
//!
//! Every `x ln x` term uses the convention `0 ln 0 = 0`, which keeps the
//! potential continuous on the closed bid simplex.

use crate::market::{prices_of, BidProfile, MarketInstance};
use crate::{Error, Result};

/// `Phi(b)` together with its gradient, when requested.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub gradient: Option<Gradient>,
}

/// Row-major `n x m` matrix of partial derivatives `d Phi / d b_ij`.
/// Entries for zero-valued goods hold `f64::NEG_INFINITY`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    n: usize,
    m: usize,
    entries: Vec<f64>,
}

impl Gradient {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.m..(i + 1) * self.m]
    }
}

fn bid_log_term(b: &BidProfile, market: &MarketInstance, i: usize) -> Result<f64> {
    let mut acc = 0.0;
    for (j, (&bij, &aij)) in b.row(i).iter().zip(market.valuation_row(i)).enumerate() {
        if bij > 0.0 {
            if aij <= 0.0 {
                return Err(Error::InvalidBid { buyer: i, good: j, bid: bij });
            }
            acc += bij * aij.ln();
        }
    }
    Ok(acc)
}

fn price_entropy_term(p: &[f64]) -> f64 {
    p.iter().filter(|&&pj| pj > 0.0).map(|&pj| pj * (1.0 - pj.ln())).sum()
}

pub fn potential(b: &BidProfile, market: &MarketInstance) -> Result<f64> {
    b.check_dims(market)?;
    let mut value = 0.0;
    for i in 0..b.n() {
        value += bid_log_term(b, market, i)?;
    }
    Ok(value + price_entropy_term(&prices_of(b)))
}

/// Potential plus, optionally, its gradient.
pub fn potential_value(b: &BidProfile, market: &MarketInstance, with_gradient: bool) -> Result<PotentialValue> {
    Ok(PotentialValue {
        value: potential(b, market)?,
        gradient: if with_gradient { Some(potential_gradient(b, market)?) } else { None },
    })
}

/// Associated utility `u~_i(b)`. Same as `Phi` except the bid-log sum runs
/// over buyer `i` only, so unilateral deviations change both by the same
/// amount.
pub fn associated_utility(i: usize, b: &BidProfile, market: &MarketInstance) -> Result<f64> {
    b.check_dims(market)?;
    if i >= b.n() {
        return Err(Error::IndexOutOfRange { index: i, len: b.n() });
    }
    Ok(bid_log_term(b, market, i)? + price_entropy_term(&prices_of(b)))
}

/// The simpler associated utility `u'_i(b) = sum_j a_ij ln p_j`. It has the
/// same best responses as [`associated_utility`] but no exact potential.
pub fn associated_utility_prime(i: usize, b: &BidProfile, market: &MarketInstance) -> Result<f64> {
    b.check_dims(market)?;
    if i >= b.n() {
        return Err(Error::IndexOutOfRange { index: i, len: b.n() });
    }
    let p = prices_of(b);
    let mut acc = 0.0;
    for (j, &aij) in market.valuation_row(i).iter().enumerate() {
        if aij > 0.0 {
            if p[j] <= 0.0 {
                return Err(Error::UndefinedLog { buyer: i, good: j });
            }
            acc += aij * p[j].ln();
        }
    }
    Ok(acc)
}

/// `d Phi / d b_ij = ln(a_ij / p_j)`.
pub fn potential_gradient(b: &BidProfile, market: &MarketInstance) -> Result<Gradient> {
    b.check_dims(market)?;
    let p = prices_of(b);
    let (n, m) = (b.n(), b.m());
    let mut entries = Vec::with_capacity(n * m);
    for i in 0..n {
        for (j, &aij) in market.valuation_row(i).iter().enumerate() {
            if aij > 0.0 {
                if p[j] <= 0.0 {
                    return Err(Error::UndefinedLog { buyer: i, good: j });
                }
                entries.push(aij.ln() - p[j].ln());
            } else {
                entries.push(f64::NEG_INFINITY);
            }
        }
    }
    Ok(Gradient { n, m, entries })
}

/// `D(x || y) = sum_k x_k ln(x_k / y_k)`, with `0 ln(0 / y) = 0`. Returns
/// `f64::INFINITY` when `x_k > 0` meets `y_k = 0`.
pub fn kl_divergence(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("KL of lengths {} and {}", x.len(), y.len())));
    }
    let mut acc = 0.0;
    for (&xk, &yk) in x.iter().zip(y) {
        if xk > 0.0 {
            if yk <= 0.0 {
                return Ok(f64::INFINITY);
            }
            acc += xk * (xk / yk).ln();
        }
    }
    Ok(acc)
}

/// `D(b_v || b'_v)` summed over the rows of `subset`.
pub fn subset_kl(subset: &[usize], b: &BidProfile, reference: &BidProfile) -> Result<f64> {
    let mut acc = 0.0;
    for &i in subset {
        acc += kl_divergence(b.row(i), reference.row(i))?;
    }
    Ok(acc)
}

/// Replaces the rows of `subset` in `reference` with the rows of `b`.
pub fn splice_rows(subset: &[usize], b: &BidProfile, reference: &BidProfile) -> BidProfile {
    let mut out = reference.clone();
    for &i in subset {
        out.row_mut(i).copy_from_slice(b.row(i));
    }
    out
}

/// First-order expansion of `Phi` in the coordinates of `subset` around
/// `reference`:
///
/// `l(b_v; b'_v) = Phi(b') + grad_v Phi(b') . (b_v - b'_v)`.
///
/// Only the rows of `b` listed in `subset` are read; the complement is taken
/// from `reference`.
pub fn linearized_potential(
    subset: &[usize],
    b: &BidProfile,
    reference: &BidProfile,
    market: &MarketInstance,
) -> Result<f64> {
    b.check_dims(market)?;
    reference.check_dims(market)?;
    let base = potential(reference, market)?;
    let p = prices_of(reference);
    let mut slope = 0.0;
    for &i in subset {
        if i >= market.n() {
            return Err(Error::IndexOutOfRange { index: i, len: market.n() });
        }
        for (j, &aij) in market.valuation_row(i).iter().enumerate() {
            let delta = b.get(i, j) - reference.get(i, j);
            if aij > 0.0 {
                if p[j] <= 0.0 {
                    return Err(Error::UndefinedLog { buyer: i, good: j });
                }
                slope += (aij.ln() - p[j].ln()) * delta;
            } else if b.get(i, j) > 0.0 {
                return Err(Error::InvalidBid { buyer: i, good: j, bid: b.get(i, j) });
            }
        }
    }
    Ok(base + slope)
}
