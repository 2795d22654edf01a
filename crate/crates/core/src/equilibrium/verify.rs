use serde::{Deserialize, Serialize};

use super::genericity::GenericityVerdict;
use super::graph::{find_cycle, support_graph, SUPPORT_THRESHOLD};
use crate::market::{prices_of, utilities_of, BidProfile, MarketInstance, PriceVector};
use crate::{Error, Result};

/// Largest violation of each competitive-equilibrium condition. JSON has no
/// infinity, so an infinite residual is written as `null` and read back.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max_j |sum_i x_ij - 1|` over goods with a positive price.
    #[serde(deserialize_with = "null_as_infinity")]
    pub clearing: f64,
    /// `max_i |sum_j b_ij - B_i|`.
    #[serde(deserialize_with = "null_as_infinity")]
    pub budget: f64,
    /// Worst bang-per-buck gap: `(a_ij/p_j - u_i/B_i)^+` over all valued
    /// goods, and `|a_ij/p_j - u_i/B_i|` over supported goods.
    #[serde(deserialize_with = "null_as_infinity")]
    pub optimality: f64,
}

fn null_as_infinity<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.clearing.max(self.budget).max(self.optimality)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub bids: BidProfile,
    pub prices: PriceVector,
    pub utilities: Vec<f64>,
    pub residuals: Residuals,
    /// Support graph (bids above [`SUPPORT_THRESHOLD`]) has no cycle.
    pub acyclic: bool,
    pub generic_verdict: Option<GenericityVerdict>,
    /// Outcome of the PRD/best-response cross-check; `None` when the
    /// certificate comes from checking a single profile.
    pub methods_agree: Option<bool>,
    pub tolerance: f64,
    pub accepted: bool,
}

impl EquilibriumCertificate {
    fn decide(&mut self) {
        self.accepted = self.residuals.max() <= self.tolerance && self.methods_agree != Some(false);
    }

    pub(crate) fn set_cross_check(&mut self, agree: bool, verdict: Option<GenericityVerdict>) {
        self.methods_agree = Some(agree);
        self.generic_verdict = verdict;
        self.decide();
    }

    pub fn reference(&self) -> crate::dynamics::Reference {
        crate::dynamics::Reference {
            bids: self.bids.clone(),
            prices: self.prices.clone(),
        }
    }
}

/// Checks market clearing, budget feasibility and bang-per-buck optimality
/// of the allocation induced by `b`. A zero-priced good that someone values
/// makes the optimality residual infinite.
pub fn verify_equilibrium(b: &BidProfile, market: &MarketInstance, tol: f64) -> Result<EquilibriumCertificate> {
    b.check_dims(market)?;
    let p = prices_of(b);
    let utilities = utilities_of(b, &p, market);

    let mut clearing: f64 = 0.0;
    for (j, &pj) in p.iter().enumerate() {
        if pj > 0.0 {
            let mut shares = 0.0;
            for i in 0..b.n() {
                let bij = b.get(i, j);
                if bij > 0.0 {
                    shares += bij / pj;
                }
            }
            clearing = clearing.max((shares - 1.0).abs());
        }
    }

    let mut budget: f64 = 0.0;
    let mut optimality: f64 = 0.0;
    for i in 0..b.n() {
        let spent: f64 = b.row(i).iter().sum();
        budget = budget.max((spent - market.budget(i)).abs());
        let level = utilities[i] / market.budget(i);
        for j in 0..b.m() {
            let a = market.valuation(i, j);
            let supported = b.get(i, j) > SUPPORT_THRESHOLD;
            if a <= 0.0 && !supported {
                continue;
            }
            let ratio = if p[j] > 0.0 { a / p[j] } else { f64::INFINITY };
            let gap = ratio - level;
            optimality = optimality.max(if supported { gap.abs() } else { gap.max(0.0) });
        }
    }

    let mut cert = EquilibriumCertificate {
        acyclic: find_cycle(&support_graph(b, SUPPORT_THRESHOLD)).is_none(),
        bids: b.clone(),
        prices: p,
        utilities,
        residuals: Residuals {
            clearing,
            budget,
            optimality,
        },
        generic_verdict: None,
        methods_agree: None,
        tolerance: tol,
        accepted: false,
    };
    cert.decide();
    Ok(cert)
}

/// Frobenius norm of `b - reference`.
pub fn distance_to_profile(b: &BidProfile, reference: &BidProfile) -> Result<f64> {
    if b.n() != reference.n() || b.m() != reference.m() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{} profiles",
            b.n(),
            b.m(),
            reference.n(),
            reference.m()
        )));
    }
    Ok(b.as_slice()
        .iter()
        .zip(reference.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}
