mod common;

use common::*;
use fpr::dynamics::*;
use fpr::potential::{associated_utility, potential};
use fpr::{BidProfile, MarketInstance};
use rand::Rng;

#[test]
fn prd_steps_never_lower_the_potential() {
    let mut r = rng(10);
    for _ in 0..2000 {
        let market = random_market(&mut r, (1, 6), (1, 6));
        let b = random_interior_profile(&mut r, &market);
        let v = random_subset(&mut r, market.n());
        let next = prd_step(&b, &v, &market).unwrap();
        let gain = potential(&next, &market).unwrap() - potential(&b, &market).unwrap();
        assert!(gain >= -1e-12);
        if next.max_abs_diff(&b) > 1e-8 {
            assert!(gain > 1e-12, "moved {} but gained {gain}", next.max_abs_diff(&b));
        }
    }
}

/// Two independent copies of the symmetric market: buyers 0, 1 trade goods
/// 0, 1 and buyers 2, 3 trade goods 2, 3.
fn two_blocks() -> MarketInstance {
    MarketInstance::new(
        vec![0.25; 4],
        vec![
            vec![0.8, 0.2, 0.0, 0.0],
            vec![0.2, 0.8, 0.0, 0.0],
            vec![0.0, 0.0, 0.8, 0.2],
            vec![0.0, 0.0, 0.2, 0.8],
        ],
    )
    .unwrap()
}

#[test]
fn subset_is_fixed_iff_each_member_is() {
    // First block at its equilibrium, second block at uniform bids.
    let market = two_blocks();
    let b = BidProfile::from_rows(vec![
        vec![0.25, 0.0, 0.0, 0.0],
        vec![0.0, 0.25, 0.0, 0.0],
        vec![0.0, 0.0, 0.125, 0.125],
        vec![0.0, 0.0, 0.125, 0.125],
    ])
    .unwrap();
    let fixed = |v: &[usize]| prd_step(&b, v, &market).unwrap().max_abs_diff(&b) <= 1e-15;
    for mask in 1u32..16 {
        let v: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
        let each = v.iter().all(|&i| fixed(&[i]));
        assert_eq!(fixed(&v), each, "subset {v:?}");
        assert_eq!(each, v.iter().all(|&i| i < 2));
    }
}

#[test]
fn subset_fixed_points_on_random_profiles() {
    let mut r = rng(11);
    for _ in 0..300 {
        let market = random_market(&mut r, (2, 5), (2, 5));
        let mut b = random_interior_profile(&mut r, &market);
        // Best responses are singleton PRD fixed points; make some rows one.
        for i in 0..market.n() {
            if r.gen_bool(0.5) {
                b = br_step(&b, i, &market).unwrap();
            }
        }
        let fixed = |v: &[usize]| prd_step(&b, v, &market).unwrap().max_abs_diff(&b) <= 1e-12;
        let v = random_subset(&mut r, market.n());
        assert_eq!(fixed(&v), v.iter().all(|&i| fixed(&[i])));
    }
}

#[test]
fn best_response_beats_random_alternatives() {
    let mut r = rng(12);
    for _ in 0..50 {
        let market = random_market(&mut r, (2, 6), (2, 6));
        let b = random_interior_profile(&mut r, &market);
        let i = r.gen_range(0..market.n());
        let best = br_step(&b, i, &market).unwrap();
        let value = associated_utility(i, &best, &market).unwrap();
        for _ in 0..1000 {
            let mut alt = b.clone();
            let mut row = random_split(&mut r, market.m(), market.budget(i));
            if r.gen_bool(0.5) {
                // Concentrate on a random subset of goods.
                let keep: Vec<bool> = (0..market.m()).map(|_| r.gen_bool(0.5)).collect();
                if keep.iter().any(|&k| k) {
                    let kept: f64 = row.iter().zip(&keep).filter(|(_, &k)| k).map(|(x, _)| x).sum();
                    for (x, &k) in row.iter_mut().zip(&keep) {
                        *x = if k { *x * market.budget(i) / kept } else { 0.0 };
                    }
                }
            }
            alt.row_mut(i).copy_from_slice(&row);
            assert!(associated_utility(i, &alt, &market).unwrap() <= value + 1e-10);
        }
    }
}

#[test]
fn best_response_support_law() {
    let mut r = rng(13);
    for _ in 0..2000 {
        let market = random_market(&mut r, (2, 6), (1, 8));
        let mut b = random_interior_profile(&mut r, &market);
        let i = r.gen_range(0..market.n());
        // Leave some goods unbid by the others.
        for j in 0..market.m() {
            if r.gen_bool(0.15) {
                for k in (0..market.n()).filter(|&k| k != i) {
                    b.set(k, j, 0.0);
                }
            }
        }
        let br = best_response_detail(i, &b, &market).unwrap();
        let c = br.level.c_star;
        let expected: Vec<usize> = (0..market.m())
            .filter(|&j| market.valuation(i, j) > c * br.theta[j])
            .collect();
        assert_eq!(br.support(), expected);
        for &j in &expected {
            let p = br.theta[j] + br.bids[j];
            assert!((market.valuation(i, j) / p - c).abs() <= 1e-9);
        }
        assert!((br.bids.iter().sum::<f64>() - market.budget(i)).abs() <= 1e-12);
    }
}

#[test]
fn water_level_matches_brute_force_over_subsets() {
    let mut r = rng(14);
    for _ in 0..300 {
        let m = r.gen_range(1..=10);
        let a: Vec<f64> = (0..m).map(|_| if r.gen_bool(0.1) { 0.0 } else { r.gen_range(0.01..1.0) }).collect();
        if a.iter().all(|&x| x == 0.0) {
            continue;
        }
        let theta: Vec<f64> = (0..m).map(|_| if r.gen_bool(0.1) { 0.0 } else { r.gen_range(0.0..1.0) }).collect();
        let budget = r.gen_range(0.01..1.0);
        let mut best: f64 = 0.0;
        for mask in 1u32..(1 << m) {
            let (mut num, mut den) = (0.0, budget);
            for j in (0..m).filter(|j| mask >> j & 1 == 1) {
                num += a[j];
                den += theta[j];
            }
            best = best.max(num / den);
        }
        let level = water_level(&a, &theta, budget);
        assert!((level.c_star - best).abs() <= 1e-12 * best.max(1.0), "{} vs {best}", level.c_star);
    }
}

#[test]
fn worked_example_agrees_with_a_grid_search() {
    let market = MarketInstance::new(vec![0.5, 0.4], vec![vec![0.8, 0.2], vec![0.5, 0.5]]).unwrap();
    let b = BidProfile::from_rows(vec![vec![0.25, 0.25], vec![0.3, 0.1]]).unwrap();
    let steps = 50_000;
    let (mut arg, mut top) = (0.0, f64::NEG_INFINITY);
    for k in 0..=steps {
        let x = 0.5 * k as f64 / steps as f64;
        let mut c = b.clone();
        c.row_mut(0).copy_from_slice(&[x, 0.5 - x]);
        let u = associated_utility(0, &c, &market).unwrap();
        if u > top {
            (arg, top) = (x, u);
        }
    }
    let row = best_response(0, &b, &market).unwrap();
    assert!((row[0] - arg).abs() <= 0.5 / steps as f64);
    assert!((row[0] - 0.42).abs() <= 1e-12 && (row[1] - 0.08).abs() <= 1e-12);
}

#[test]
fn repeated_single_buyer_prd_approaches_the_best_response() {
    let mut r = rng(15);
    for _ in 0..10 {
        let market = random_market(&mut r, (2, 6), (2, 6));
        let b = random_interior_profile(&mut r, &market);
        let i = r.gen_range(0..market.n());
        let target = best_response(i, &b, &market).unwrap();
        let mut c = b.clone();
        for _ in 0..10_000 {
            prd_step_in_place(&mut c, &[i], &market).unwrap();
        }
        assert!(max_abs(c.row(i), &target) <= 1e-7);
    }
}

#[test]
fn budgets_are_conserved_over_long_runs() {
    let mut r = rng(16);
    let market = random_market(&mut r, (5, 5), (5, 5));
    let schedule = make_random_subset_schedule(5, 100_000, 5, 3);
    let mut b = default_initial_bids(&market);
    let mut worst_step: f64 = 0.0;
    for v in schedule.iter() {
        prd_step_in_place(&mut b, v, &market).unwrap();
        for &i in v {
            worst_step = worst_step.max((b.row(i).iter().sum::<f64>() - market.budget(i)).abs());
        }
    }
    assert!(worst_step <= 1e-12);
    for i in 0..5 {
        assert!((b.row(i).iter().sum::<f64>() - market.budget(i)).abs() <= 1e-9);
    }

    let mut b = default_initial_bids(&market);
    for t in 0..100_000 {
        let i = t % 5;
        b = br_step(&b, i, &market).unwrap();
        assert!((b.row(i).iter().sum::<f64>() - market.budget(i)).abs() <= 1e-12);
    }
}

#[test]
fn best_response_moves_continuously() {
    let mut r = rng(17);
    let delta = 1e-7;
    let mut checked = 0;
    while checked < 200 {
        let market = random_market(&mut r, (2, 5), (2, 6));
        let b = random_interior_profile(&mut r, &market);
        let i = r.gen_range(0..market.n());
        let br = best_response_detail(i, &b, &market).unwrap();
        // Skip instances near a sorting tie or a support change.
        let c = br.level.c_star;
        let margin = (0..market.m())
            .map(|j| (market.valuation(i, j) / br.theta[j] - c).abs() / c)
            .fold(f64::INFINITY, f64::min);
        if margin < 1e-3 {
            continue;
        }
        let mut moved = b.clone();
        for k in (0..market.n()).filter(|&k| k != i) {
            for j in 0..market.m() {
                moved.set(k, j, b.get(k, j) + delta * r.gen_range(-1.0..1.0));
            }
        }
        let shift = max_abs(&best_response(i, &moved, &market).unwrap(), &br.bids);
        assert!(shift <= 100.0 * delta, "shift {shift}");
        checked += 1;
    }
}
