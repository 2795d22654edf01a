use std::cmp::Ordering;

use crate::market::{prices_of, BidProfile, MarketInstance};
use crate::{Error, Result};

/// Proportional response for the buyers in `subset`; every other row is
/// left untouched.
///
/// Activated buyers rebid `b_ij = a_ij x_ij B_i / u_i` against the prices of
/// the current profile, so simultaneous updates never see each other.
pub fn prd_step(b: &BidProfile, subset: &[usize], market: &MarketInstance) -> Result<BidProfile> {
    let mut next = b.clone();
    prd_step_in_place(&mut next, subset, market)?;
    Ok(next)
}

pub fn prd_step_in_place(b: &mut BidProfile, subset: &[usize], market: &MarketInstance) -> Result<()> {
    b.check_dims(market)?;
    if subset.is_empty() {
        return Ok(());
    }
    check_subset(subset, market.n())?;
    let p = prices_of(b);
    // Validate every activated buyer before touching any row so a failed step
    // leaves the profile unchanged.
    let mut utilities = Vec::with_capacity(subset.len());
    for &i in subset {
        let u = crate::market::row_utility(market.valuation_row(i), b.row(i), &p);
        if !(u > 0.0) {
            return Err(Error::DegenerateState { buyer: i });
        }
        utilities.push(u);
    }
    for (&i, &u) in subset.iter().zip(&utilities) {
        let budget = market.budget(i);
        let a = market.valuation_row(i);
        let row = b.row_mut(i);
        let mut total = 0.0;
        for ((bij, &aij), &pj) in row.iter_mut().zip(a).zip(p.iter()) {
            if *bij > 0.0 {
                *bij = aij * (*bij / pj) * budget / u;
                total += *bij;
            }
        }
        // Rescale to the exact budget so round-off cannot accumulate.
        let scale = budget / total;
        for bij in row.iter_mut() {
            *bij *= scale;
        }
    }
    Ok(())
}

fn check_subset(subset: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in subset {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidInput(format!("buyer {i} activated twice in one step")));
        }
    }
    Ok(())
}

/// Output of the prefix scan that computes the water level `c*`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaterLevel {
    /// The maximal `c_s = sum_s a_j / (B + sum_s theta_j)` over all subsets.
    pub c_star: f64,
    /// Positively-valued goods in scan order: zero-pre-price goods first
    /// (by valuation, descending), then by `a_j / theta_j` descending. Ties
    /// keep ascending good index.
    pub order: Vec<usize>,
    /// Length of the first prefix of `order` attaining `c_star`.
    pub prefix_len: usize,
}

/// Computes `c*` for valuations `a`, pre-prices `theta` and budget `budget`.
///
/// Goods with `a_j = 0` never enter the scan; they can only lower `c_s`.
pub fn water_level(a: &[f64], theta: &[f64], budget: f64) -> WaterLevel {
    let mut free: Vec<usize> = Vec::new();
    let mut priced: Vec<usize> = Vec::new();
    for (j, (&aj, &tj)) in a.iter().zip(theta).enumerate() {
        if aj > 0.0 {
            if tj > 0.0 {
                priced.push(j);
            } else {
                free.push(j);
            }
        }
    }
    // Stable sorts keep the ascending-index order among equal keys.
    free.sort_by(|&x, &y| a[y].partial_cmp(&a[x]).unwrap_or(Ordering::Equal));
    priced.sort_by(|&x, &y| {
        (a[y] / theta[y])
            .partial_cmp(&(a[x] / theta[x]))
            .unwrap_or(Ordering::Equal)
    });
    let order: Vec<usize> = free.into_iter().chain(priced).collect();

    let (mut value, mut cost) = (0.0, 0.0);
    let (mut c_star, mut prefix_len) = (0.0, 0);
    for (k, &j) in order.iter().enumerate() {
        value += a[j];
        cost += theta[j];
        let c = value / (cost + budget);
        if c > c_star {
            c_star = c;
            prefix_len = k + 1;
        }
    }
    WaterLevel {
        c_star,
        order,
        prefix_len,
    }
}

/// Best response of a buyer together with its water level.
#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub bids: Vec<f64>,
    pub theta: Vec<f64>,
    pub level: WaterLevel,
}

impl BestResponse {
    /// Goods receiving a positive bid, i.e. `{j : a_j > c* theta_j}`.
    pub fn support(&self) -> Vec<usize> {
        (0..self.bids.len()).filter(|&j| self.bids[j] > 0.0).collect()
    }
}

/// Unique maximizer of the associated utility of buyer `i` against the
/// other rows of `b`: `b*_ij = (a_ij / c* - theta_ij)^+`.
pub fn best_response(i: usize, b: &BidProfile, market: &MarketInstance) -> Result<Vec<f64>> {
    Ok(best_response_detail(i, b, market)?.bids)
}

pub fn best_response_detail(i: usize, b: &BidProfile, market: &MarketInstance) -> Result<BestResponse> {
    b.check_dims(market)?;
    if i >= market.n() {
        return Err(Error::IndexOutOfRange { index: i, len: market.n() });
    }
    // Pre-prices summed over the other buyers directly, so a good nobody
    // else bids on has theta exactly zero.
    let mut theta = vec![0.0; market.m()];
    for k in (0..market.n()).filter(|&k| k != i) {
        for (t, &bkj) in theta.iter_mut().zip(b.row(k)) {
            *t += bkj;
        }
    }
    let a = market.valuation_row(i);
    let level = water_level(a, &theta, market.budget(i));
    let bids = a
        .iter()
        .zip(&theta)
        .map(|(&aj, &tj)| if aj > 0.0 { (aj / level.c_star - tj).max(0.0) } else { 0.0 })
        .collect();
    Ok(BestResponse { bids, theta, level })
}

/// Replaces row `i` with its best response.
pub fn br_step(b: &BidProfile, i: usize, market: &MarketInstance) -> Result<BidProfile> {
    let row = best_response(i, b, market)?;
    let mut next = b.clone();
    next.row_mut(i).copy_from_slice(&row);
    Ok(next)
}
