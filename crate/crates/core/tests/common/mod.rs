#![allow(dead_code)]

use fpr::market::generate_random_market;
use fpr::{BidProfile, MarketInstance};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn sym2() -> MarketInstance {
    MarketInstance::new(vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap()
}

pub fn random_market(rng: &mut ChaCha8Rng, n_range: (usize, usize), m_range: (usize, usize)) -> MarketInstance {
    let n = rng.gen_range(n_range.0..=n_range.1);
    let m = rng.gen_range(m_range.0..=m_range.1);
    generate_random_market(n, m, rng.gen())
}

/// Random positive split of `total` over `k` parts.
pub fn random_split(rng: &mut ChaCha8Rng, k: usize, total: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| total * x / s).collect()
}

/// Budget-feasible profile with every bid strictly positive.
pub fn random_interior_profile(rng: &mut ChaCha8Rng, market: &MarketInstance) -> BidProfile {
    let rows = (0..market.n())
        .map(|i| random_split(rng, market.m(), market.budget(i)))
        .collect();
    BidProfile::from_rows(rows).unwrap()
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

/// Prices summed directly from the bids.
pub fn naive_prices(b: &BidProfile) -> Vec<f64> {
    (0..b.m()).map(|j| (0..b.n()).map(|i| b.get(i, j)).sum()).collect()
}

/// Potential evaluated term by term, independently of the library.
pub fn naive_potential(b: &BidProfile, market: &MarketInstance) -> f64 {
    let p = naive_prices(b);
    let mut phi = 0.0;
    for i in 0..b.n() {
        for j in 0..b.m() {
            if b.get(i, j) > 0.0 {
                phi += b.get(i, j) * market.valuation(i, j).ln();
            }
        }
    }
    for pj in p {
        if pj > 0.0 {
            phi += pj * (1.0 - pj.ln());
        }
    }
    phi
}

pub fn naive_utilities(b: &BidProfile, market: &MarketInstance) -> Vec<f64> {
    let p = naive_prices(b);
    (0..b.n())
        .map(|i| {
            (0..b.m())
                .filter(|&j| b.get(i, j) > 0.0)
                .map(|j| market.valuation(i, j) * b.get(i, j) / p[j])
                .sum()
        })
        .collect()
}

pub fn max_abs(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
