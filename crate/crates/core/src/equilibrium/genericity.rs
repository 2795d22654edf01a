use serde::{Deserialize, Serialize};

use crate::market::MarketInstance;

/// Upper bound on the number of subsets enumerated by [`genericity_check`].
pub const DEFAULT_MAX_ENUMERATED: usize = 1 << 20;

const LOG_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum GenericityVerdict {
    /// No two distinct entry subsets have equal valuation products.
    Generic,
    /// Two distinct subsets `(buyer, good)` with equal products.
    NonGeneric {
        witness: (Vec<(usize, usize)>, Vec<(usize, usize)>),
    },
    /// No equality among subsets of size `<= searched_up_to`, but larger
    /// subsets were not examined.
    Inconclusive { searched_up_to: usize },
}

impl GenericityVerdict {
    pub fn is_generic(&self) -> bool {
        matches!(self, GenericityVerdict::Generic)
    }
}

/// Searches for a multiplicative equality among the positive valuations,
/// comparing log-sums of all subsets with at most `max_subset_size` entries.
pub fn genericity_check(market: &MarketInstance, max_subset_size: usize) -> GenericityVerdict {
    genericity_check_with(market, max_subset_size, DEFAULT_MAX_ENUMERATED)
}

/// As [`genericity_check`], stopping before a subset size whose enumeration
/// would push the total past `max_enumerated`.
///
/// Sizes are searched in increasing order. Within a size level, the
/// reported witness is the tied pair whose earlier member comes first in
/// enumeration order (size, then lexicographic by entry index).
pub fn genericity_check_with(
    market: &MarketInstance,
    max_subset_size: usize,
    max_enumerated: usize,
) -> GenericityVerdict {
    let entries: Vec<(usize, usize)> = (0..market.n())
        .flat_map(|i| market.support(i).map(move |j| (i, j)))
        .collect();
    let logs: Vec<f64> = entries.iter().map(|&(i, j)| market.valuation(i, j).ln()).collect();
    let total = entries.len();
    let cap = max_subset_size.min(total);

    // Flat storage of enumerated subsets: members[offsets[k]..offsets[k+1]].
    let mut members: Vec<u32> = Vec::new();
    let mut offsets: Vec<usize> = vec![0];
    let mut sums: Vec<f64> = Vec::new();
    let mut searched = 0;

    for size in 1..=cap {
        let count = binomial(total, size);
        if count.is_none_or(|c| sums.len().saturating_add(c) > max_enumerated) {
            break;
        }
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            sums.push(combo.iter().map(|&e| logs[e]).sum());
            members.extend(combo.iter().map(|&e| e as u32));
            offsets.push(members.len());
            if !next_combination(&mut combo, total) {
                break;
            }
        }
        searched = size;

        if let Some((a, b)) = first_tie(&sums) {
            let subset = |k: usize| -> Vec<(usize, usize)> {
                members[offsets[k]..offsets[k + 1]].iter().map(|&e| entries[e as usize]).collect()
            };
            return GenericityVerdict::NonGeneric {
                witness: (subset(a), subset(b)),
            };
        }
    }
    if searched == total {
        GenericityVerdict::Generic
    } else {
        GenericityVerdict::Inconclusive {
            searched_up_to: searched,
        }
    }
}

/// The tied pair `(k, k')`, `k < k'`, with the smallest `k`.
fn first_tie(sums: &[f64]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..sums.len()).collect();
    order.sort_by(|&x, &y| sums[x].total_cmp(&sums[y]).then(x.cmp(&y)));
    let mut best: Option<(usize, usize)> = None;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && sums[order[end]] - sums[order[end - 1]] <= LOG_TOL {
            end += 1;
        }
        if end - start > 1 {
            let mut group: Vec<usize> = order[start..end].to_vec();
            group.sort_unstable();
            if best.is_none_or(|(a, _)| group[0] < a) {
                best = Some((group[0], group[1]));
            }
        }
        start = end;
    }
    best
}

fn next_combination(combo: &mut [usize], total: usize) -> bool {
    let k = combo.len();
    for pos in (0..k).rev() {
        if combo[pos] < total - k + pos {
            combo[pos] += 1;
            for q in pos + 1..k {
                combo[q] = combo[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}
