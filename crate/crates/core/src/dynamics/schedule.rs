use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// The adversary's choice of activated buyers, one subset per step.
///
/// Steps are stored flat. A periodic schedule repeats its stored steps
/// forever; otherwise the schedule ends after its last step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivationSchedule {
    n: usize,
    offsets: Vec<usize>,
    members: Vec<usize>,
    liveness: Option<usize>,
    periodic: bool,
}

impl ActivationSchedule {
    /// Each step is sorted; indices must be `< n` and distinct within a step.
    /// A declared liveness bound is checked with [`validate_liveness`].
    pub fn new(n: usize, steps: Vec<Vec<usize>>, liveness: Option<usize>) -> Result<Self> {
        let schedule = Self::build(n, steps, liveness, false)?;
        if let Some(t) = liveness {
            if !validate_liveness(&schedule, t) {
                return Err(Error::Liveness(format!("schedule declares T = {t} but violates it")));
            }
        }
        Ok(schedule)
    }

    /// Repeats `period` forever. The liveness bound is checked across the
    /// wrap-around.
    pub fn periodic(n: usize, period: Vec<Vec<usize>>, liveness: Option<usize>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidInput("periodic schedule needs at least one step".into()));
        }
        let schedule = Self::build(n, period, liveness, true)?;
        if let Some(t) = liveness {
            if !validate_liveness(&schedule, t) {
                return Err(Error::Liveness(format!("periodic schedule violates T = {t}")));
            }
        }
        Ok(schedule)
    }

    fn build(n: usize, steps: Vec<Vec<usize>>, liveness: Option<usize>, periodic: bool) -> Result<Self> {
        let mut offsets = Vec::with_capacity(steps.len() + 1);
        let mut members = Vec::new();
        offsets.push(0);
        for (t, mut step) in steps.into_iter().enumerate() {
            step.sort_unstable();
            if let Some(&i) = step.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if step.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!("step {t} activates a buyer twice")));
            }
            members.extend(step);
            offsets.push(members.len());
        }
        Ok(ActivationSchedule {
            n,
            offsets,
            members,
            liveness,
            periodic,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Buyers activated at step `t`.
    pub fn step(&self, t: usize) -> &[usize] {
        let k = if self.periodic { t % self.len() } else { t };
        &self.members[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Stored steps (one period, for periodic schedules).
    pub fn iter(&self) -> impl Iterator<Item = &[usize]> + '_ {
        (0..self.len()).map(move |k| &self.members[self.offsets[k]..self.offsets[k + 1]])
    }

    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.iter().map(<[usize]>::to_vec).collect()
    }

    /// Number of stored steps.
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of steps the schedule can drive; `None` when periodic.
    pub fn horizon(&self) -> Option<usize> {
        (!self.periodic).then(|| self.len())
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn liveness(&self) -> Option<usize> {
        self.liveness
    }
}

/// `v^t = {t mod n}` with liveness `T = n`.
pub fn make_round_robin_schedule(n: usize, steps: usize) -> ActivationSchedule {
    assert!(n >= 1);
    ActivationSchedule::build(n, (0..steps).map(|t| vec![t % n]).collect(), Some(n), false)
        .expect("round-robin indices are in range")
}

/// Every buyer at every step (`T = 1`), repeated forever.
pub fn make_synchronous_schedule(n: usize) -> ActivationSchedule {
    ActivationSchedule::build(n, vec![(0..n).collect()], Some(1), true).expect("indices are in range")
}

/// Uniformly random nonempty subsets. A buyer left out for `T - 1`
/// consecutive steps is forced into the `T`-th, so the result is `T`-live.
pub fn make_random_subset_schedule(n: usize, steps: usize, liveness: usize, seed: u64) -> ActivationSchedule {
    assert!(n >= 1 && liveness >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Step of the most recent activation, offset by one so "never" is 0.
    let mut last_seen = vec![0usize; n];
    let mut out = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut step: Vec<usize> = loop {
            let pick: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            if !pick.is_empty() {
                break pick;
            }
        };
        for i in 0..n {
            if t + 1 - last_seen[i] >= liveness && !step.contains(&i) {
                step.push(i);
            }
        }
        step.sort_unstable();
        for &i in &step {
            last_seen[i] = t + 1;
        }
        out.push(step);
    }
    ActivationSchedule::build(n, out, Some(liveness), false).expect("indices are in range")
}

/// Sequential schedule: one buyer per step, visiting buyers in a fresh
/// random permutation each round. Consecutive activations of a buyer are at
/// most `2n - 1` steps apart.
pub fn make_random_order_schedule(n: usize, steps: usize, seed: u64) -> ActivationSchedule {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(steps);
    while out.len() < steps {
        order.shuffle(&mut rng);
        out.extend(order.iter().take(steps - out.len()).map(|&i| vec![i]));
    }
    ActivationSchedule::build(n, out, Some(2 * n - 1), false).expect("indices are in range")
}

/// True iff every buyer appears in every window of `liveness` consecutive
/// steps. Windows cut off by the end of the schedule are exempt.
pub fn validate_liveness(schedule: &ActivationSchedule, liveness: usize) -> bool {
    if liveness == 0 {
        return false;
    }
    // A periodic schedule is checked over enough repetitions to cover every
    // window that straddles the wrap-around.
    let len = if schedule.periodic {
        schedule.len() * (2 + liveness / schedule.len())
    } else {
        schedule.len()
    };
    if len < liveness {
        return true;
    }
    // Gap since the last appearance (the virtual appearance at step -1
    // covers the first window).
    let mut last: Vec<isize> = vec![-1; schedule.n];
    for t in 0..len {
        let step = schedule.step(t);
        for &i in step {
            if t as isize - last[i] > liveness as isize {
                return false;
            }
            last[i] = t as isize;
        }
    }
    last.iter().all(|&l| len as isize - l <= liveness as isize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_examples() {
        let s = make_round_robin_schedule(3, 4);
        assert_eq!(s.to_vecs(), vec![vec![0], vec![1], vec![2], vec![0]]);
        assert_eq!(s.liveness(), Some(3));
        assert!(validate_liveness(&s, 3));
        assert!(!validate_liveness(&s, 2));
    }

    #[test]
    fn liveness_examples() {
        let s = ActivationSchedule::new(2, vec![vec![0], vec![0], vec![1]], None).unwrap();
        assert!(!validate_liveness(&s, 2));
        assert!(validate_liveness(&make_synchronous_schedule(4), 1));
        // Short schedules only have truncated windows.
        let s = ActivationSchedule::new(3, vec![vec![0]], None).unwrap();
        assert!(validate_liveness(&s, 2));
        assert!(!validate_liveness(&s, 0));
    }

    #[test]
    fn liveness_checks_the_tail() {
        let s = ActivationSchedule::new(2, vec![vec![0, 1], vec![0], vec![0], vec![0]], None).unwrap();
        assert!(validate_liveness(&s, 4));
        assert!(!validate_liveness(&s, 3));
    }

    #[test]
    fn declared_liveness_is_enforced() {
        let err = ActivationSchedule::new(2, vec![vec![0], vec![0], vec![1]], Some(2)).unwrap_err();
        assert!(matches!(err, Error::Liveness(_)));
        assert!(ActivationSchedule::new(2, vec![vec![2]], None).is_err());
        assert!(ActivationSchedule::new(2, vec![vec![1, 1]], None).is_err());
    }

    #[test]
    fn random_subsets_are_live_and_deterministic() {
        for (n, t) in [(1, 1), (3, 1), (5, 2), (10, 10), (10, 20), (7, 3)] {
            let s = make_random_subset_schedule(n, 500, t, 11);
            assert!(validate_liveness(&s, t), "n={n} T={t}");
            assert!(s.iter().all(|v| !v.is_empty()));
            assert_eq!(s, make_random_subset_schedule(n, 500, t, 11));
        }
        let sync = make_random_subset_schedule(4, 50, 1, 3);
        assert!(sync.iter().all(|v| v.len() == 4));
        assert_ne!(make_random_subset_schedule(6, 50, 6, 1), make_random_subset_schedule(6, 50, 6, 2));
    }

    #[test]
    fn periodic_schedules_wrap() {
        let s = ActivationSchedule::periodic(3, vec![vec![0], vec![1, 2]], Some(2)).unwrap();
        assert_eq!(s.horizon(), None);
        assert_eq!(s.step(5), &[1, 2]);
        assert!(validate_liveness(&s, 2));
        assert!(!validate_liveness(&s, 1));
        // Buyer 2 is absent across the wrap: steps 2,3 of [{2},{0},{1},{0}]
        // repeat as ... {1},{0},{2} ...
        let s = ActivationSchedule::periodic(3, vec![vec![2], vec![0], vec![1], vec![0]], None).unwrap();
        assert!(validate_liveness(&s, 4));
        assert!(!validate_liveness(&s, 3));
        assert!(ActivationSchedule::periodic(3, vec![], None).is_err());
    }

    #[test]
    fn random_order_is_sequential_and_live() {
        let s = make_random_order_schedule(5, 103, 9);
        assert_eq!(s.len(), 103);
        assert!(s.iter().all(|v| v.len() == 1));
        assert!(validate_liveness(&s, 9));
    }
}
