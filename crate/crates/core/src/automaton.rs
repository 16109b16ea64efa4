//! Exact evolution of one classical configuration.
//!
//! Within a step the crossings are tested against the current fast
//! coordinates, firing swaps are applied in canonical `(i, j)` order, then
//! every coordinate advances by one lattice site.

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::numbers::{crt_pair, lcm_all};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClassicalState {
    pub primary: usize,
    /// Lattice coordinate `k_i` of each fast phase `φ_i = 2π k_i / L_i`.
    pub fast: Vec<u64>,
}

impl ClassicalState {
    pub fn new(primary: usize, fast: Vec<u64>) -> Self {
        ClassicalState { primary, fast }
    }

    pub fn check(&self, spec: &ModelSpec) -> Result<()> {
        if self.primary >= spec.n_primary {
            return Err(Error::InvalidArgument(format!(
                "primary state {} out of range for {} states",
                self.primary, spec.n_primary
            )));
        }
        if self.fast.len() != spec.periods.len() {
            return Err(Error::DimensionMismatch { expected: spec.periods.len(), found: self.fast.len() });
        }
        if let Some(i) = self.fast.iter().zip(&spec.periods).position(|(k, l)| k >= l) {
            return Err(Error::InvalidArgument(format!(
                "fast coordinate k_{} = {} outside [0, {})",
                i + 1,
                self.fast[i],
                spec.periods[i]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimaryTimeSeries {
    pub t0: u64,
    pub values: Vec<usize>,
}

#[derive(Debug, Clone)]
struct PairTable {
    i: usize,
    j: usize,
    lj: usize,
    /// Row-major `L_i × L_j` occupancy of crossing sites.
    hits: Vec<bool>,
}

impl PairTable {
    #[inline]
    fn fires(&self, fast: &[u64]) -> bool {
        self.hits[fast[self.i] as usize * self.lj + fast[self.j] as usize]
    }
}

/// A validated spec compiled into per-pair lookup tables.
#[derive(Debug, Clone)]
pub struct Automaton {
    n: usize,
    periods: Vec<u64>,
    pairs: Vec<PairTable>,
}

impl Automaton {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        spec.ensure_valid()?;
        let mut pairs: Vec<PairTable> = Vec::new();
        for &(i, j) in spec.pair_counts().keys() {
            let (li, lj) = (spec.periods[i] as usize, spec.periods[j] as usize);
            let mut hits = vec![false; li * lj];
            for c in spec.crossings.iter().filter(|c| c.pair == (i, j)) {
                hits[c.site.0 as usize * lj + c.site.1 as usize] = true;
            }
            pairs.push(PairTable { i, j, lj, hits });
        }
        Ok(Automaton { n: spec.n_primary, periods: spec.periods.clone(), pairs })
    }

    pub fn n_primary(&self) -> usize {
        self.n
    }

    pub fn periods(&self) -> &[u64] {
        &self.periods
    }

    /// Applies every swap that fires at `fast` to `primary`.
    #[inline]
    pub fn fire(&self, fast: &[u64], mut primary: usize) -> usize {
        for p in &self.pairs {
            if (primary == p.i || primary == p.j) && p.fires(fast) {
                primary = if primary == p.i { p.j } else { p.i };
            }
        }
        primary
    }

    /// Calls `f(i, j)` for each pair whose crossing fires at `fast`, in
    /// canonical order, independent of the primary state.
    #[inline]
    pub fn for_each_firing(&self, fast: &[u64], mut f: impl FnMut(usize, usize)) {
        for p in &self.pairs {
            if p.fires(fast) {
                f(p.i, p.j);
            }
        }
    }

    #[inline]
    pub fn advance(&self, fast: &mut [u64]) {
        for (k, &l) in fast.iter_mut().zip(&self.periods) {
            *k += 1;
            if *k == l {
                *k = 0;
            }
        }
    }

    pub fn step_in_place(&self, state: &mut ClassicalState) {
        state.primary = self.fire(&state.fast, state.primary);
        self.advance(&mut state.fast);
    }

    pub fn trajectory(&self, initial: &ClassicalState, steps: u64) -> PrimaryTimeSeries {
        let mut state = initial.clone();
        let mut values = Vec::with_capacity(steps as usize + 1);
        values.push(state.primary);
        for _ in 0..steps {
            self.step_in_place(&mut state);
            values.push(state.primary);
        }
        PrimaryTimeSeries { t0: 0, values }
    }
}

/// Decodes a mixed-radix fast-lattice index; the last coordinate varies fastest.
pub fn fast_from_index(periods: &[u64], mut index: u64) -> Vec<u64> {
    let mut fast = vec![0; periods.len()];
    for (k, &l) in fast.iter_mut().zip(periods).rev() {
        *k = index % l;
        index /= l;
    }
    fast
}

pub fn fast_to_index(periods: &[u64], fast: &[u64]) -> u64 {
    fast.iter().zip(periods).fold(0, |acc, (&k, &l)| acc * l + k)
}

pub fn step(state: &ClassicalState, spec: &ModelSpec) -> Result<ClassicalState> {
    let automaton = Automaton::new(spec)?;
    state.check(spec)?;
    let mut next = state.clone();
    automaton.step_in_place(&mut next);
    Ok(next)
}

pub fn run_trajectory(initial: &ClassicalState, spec: &ModelSpec, steps: u64) -> Result<PrimaryTimeSeries> {
    let automaton = Automaton::new(spec)?;
    initial.check(spec)?;
    Ok(automaton.trajectory(initial, steps))
}

/// Recurrence time of the fast lattice: `lcm(L_i)`, which is `∏ L_i` for
/// pairwise coprime periods.
pub fn joint_period(spec: &ModelSpec) -> Result<u64> {
    lcm_all(&spec.periods).ok_or(Error::Overflow("joint period"))
}

/// Steps until the pair `(k_i, k_j)` starting at `from` first reaches `site`.
pub fn crossing_time(spec: &ModelSpec, pair: (usize, usize), site: (u64, u64), from: (u64, u64)) -> Result<u64> {
    let (i, j) = pair;
    let (li, lj) = match (spec.periods.get(i), spec.periods.get(j)) {
        (Some(&li), Some(&lj)) if i != j => (li, lj),
        _ => return Err(Error::InvalidArgument(format!("pair ({i}, {j}) not in the model"))),
    };
    if site.0 >= li || site.1 >= lj || from.0 >= li || from.1 >= lj {
        return Err(Error::InvalidArgument("coordinates outside the sublattice".into()));
    }
    let ri = (site.0 + li - from.0) % li;
    let rj = (site.1 + lj - from.1) % lj;
    crt_pair(ri, li, rj, lj).ok_or_else(|| Error::InvalidArgument(format!("periods {li} and {lj} are not coprime")))
}

/// The one-step map on all `N·∏L_i` ontological states as a permutation.
/// State `primary·∏L + fast_index` maps to the index of its successor.
pub fn step_permutation(spec: &ModelSpec, max_states: u64) -> Result<Vec<usize>> {
    let automaton = Automaton::new(spec)?;
    let volume = spec.fast_volume()?;
    let total = volume.checked_mul(spec.n_primary as u64).ok_or(Error::Overflow("state count"))?;
    if total > max_states {
        return Err(Error::BudgetExceeded { required: total as u128, allowed: max_states as u128 });
    }
    let mut images = vec![0usize; total as usize];
    for f in 0..volume {
        let fast = fast_from_index(&spec.periods, f);
        let mut next_fast = fast.clone();
        automaton.advance(&mut next_fast);
        let nf = fast_to_index(&spec.periods, &next_fast);
        for p in 0..spec.n_primary {
            let q = automaton.fire(&fast, p);
            images[(p as u64 * volume + f) as usize] = (q as u64 * volume + nf) as usize;
        }
    }
    Ok(images)
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::model::{CrossingPoint, Sign};

    fn single(li: u64, lj: u64, site: (u64, u64)) -> ModelSpec {
        ModelSpec::new(vec![li, lj], vec![CrossingPoint::new((0, 1), site, Sign::Plus)])
    }

    #[test]
    fn step_examples() {
        let spec = single(3, 5, (0, 0));
        let s = |p, a, b| ClassicalState::new(p, vec![a, b]);
        assert_eq!(step(&s(0, 0, 0), &spec).unwrap(), s(1, 1, 1));
        assert_eq!(step(&s(0, 1, 2), &spec).unwrap(), s(0, 2, 3));
        assert_eq!(step(&s(1, 2, 4), &spec).unwrap(), s(1, 0, 0));
    }

    #[test]
    fn step_rejects_bad_state() {
        let spec = single(3, 5, (0, 0));
        assert!(step(&ClassicalState::new(2, vec![0, 0]), &spec).is_err());
        assert!(step(&ClassicalState::new(0, vec![3, 0]), &spec).is_err());
        assert!(step(&ClassicalState::new(0, vec![0]), &spec).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let spec = single(3, 5, (0, 0));
        let t = run_trajectory(&ClassicalState::new(0, vec![0, 0]), &spec, 2).unwrap();
        assert_eq!(t.values, vec![0, 1, 1]);
        let t = run_trajectory(&ClassicalState::new(0, vec![0, 0]), &spec, 0).unwrap();
        assert_eq!(t.values, vec![0]);

        let t = run_trajectory(&ClassicalState::new(0, vec![1, 1]), &spec, 15).unwrap();
        assert_eq!(t.values.len(), 16);
        let swaps = t.values.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(swaps, 1);
        // Hand scan of the orbit: (1,1) reaches (0,0) after 14 advances.
        assert_eq!(t.values[14], 0);
        assert_eq!(t.values[15], 1);
    }

    #[test]
    fn joint_periods() {
        assert_eq!(joint_period(&ModelSpec::new(vec![3, 5], vec![])).unwrap(), 15);
        assert_eq!(joint_period(&ModelSpec::new(vec![11, 13], vec![])).unwrap(), 143);
        assert_eq!(joint_period(&ModelSpec::new(vec![2, 3, 5], vec![])).unwrap(), 30);
        let huge = ModelSpec::new(vec![4_294_967_291, 4_294_967_279, 4_294_967_231], vec![]);
        assert!(matches!(joint_period(&huge), Err(Error::Overflow(_))));
    }

    fn scan_crossing_time(li: u64, lj: u64, site: (u64, u64), from: (u64, u64)) -> u64 {
        (0..li * lj).find(|t| (from.0 + t) % li == site.0 && (from.1 + t) % lj == site.1).unwrap()
    }

    #[test]
    fn crossing_time_examples() {
        let spec = single(3, 5, (0, 0));
        assert_eq!(crossing_time(&spec, (0, 1), (0, 0), (0, 0)).unwrap(), 0);
        assert_eq!(crossing_time(&spec, (0, 1), (1, 2), (0, 0)).unwrap(), 7);
        assert_eq!(crossing_time(&spec, (0, 1), (0, 0), (1, 1)).unwrap(), 14);
    }

    #[test]
    fn crossing_time_matches_scan() {
        let spec = ModelSpec::new(vec![4, 7, 9], vec![]);
        for &(i, j) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let (li, lj) = (spec.periods[i], spec.periods[j]);
            for a in 0..li {
                for b in 0..lj {
                    for (fa, fb) in [(0, 0), (li - 1, 0), (1, lj - 1)] {
                        assert_eq!(
                            crossing_time(&spec, (i, j), (a, b), (fa, fb)).unwrap(),
                            scan_crossing_time(li, lj, (a, b), (fa, fb))
                        );
                    }
                }
            }
        }
    }

    fn three_state() -> ModelSpec {
        ModelSpec::new(
            vec![2, 3, 5],
            vec![
                CrossingPoint::new((0, 1), (1, 2), Sign::Plus),
                CrossingPoint::new((0, 2), (1, 3), Sign::Minus),
                CrossingPoint::new((1, 2), (0, 0), Sign::Plus),
                CrossingPoint::new((1, 2), (2, 4), Sign::Plus),
            ],
        )
    }

    #[test]
    fn step_is_a_bijection() {
        for spec in [single(3, 5, (2, 3)), three_state()] {
            let images = step_permutation(&spec, 1 << 20).unwrap();
            let distinct: HashSet<_> = images.iter().collect();
            assert_eq!(distinct.len(), images.len());
        }
    }

    #[test]
    fn fast_state_recurs_and_ignores_primary() {
        let spec = three_state();
        let period = joint_period(&spec).unwrap();
        let automaton = Automaton::new(&spec).unwrap();
        for f in 0..spec.fast_volume().unwrap() {
            let fast = fast_from_index(&spec.periods, f);
            let mut runs: Vec<_> = (0..3).map(|p| ClassicalState::new(p, fast.clone())).collect();
            for _ in 0..period {
                for r in runs.iter_mut() {
                    automaton.step_in_place(r);
                }
                assert!(runs.windows(2).all(|w| w[0].fast == w[1].fast));
            }
            assert_eq!(runs[0].fast, fast);
        }
    }

    #[test]
    fn each_crossing_fires_once_per_period() {
        let spec = three_state();
        let automaton = Automaton::new(&spec).unwrap();
        let period = joint_period(&spec).unwrap();
        for f in [0, 7, 29] {
            let mut fast = fast_from_index(&spec.periods, f);
            let mut hits = vec![0u32; spec.crossings.len()];
            for _ in 0..period {
                for (idx, c) in spec.crossings.iter().enumerate() {
                    if (fast[c.pair.0], fast[c.pair.1]) == c.site {
                        hits[idx] += 1;
                    }
                }
                automaton.advance(&mut fast);
            }
            // Each site is hit once per L_i·L_j steps, so period / (L_i·L_j) times.
            for (idx, c) in spec.crossings.iter().enumerate() {
                let sub = spec.periods[c.pair.0] * spec.periods[c.pair.1];
                assert_eq!(hits[idx] as u64, period / sub);
            }
        }
    }

    #[test]
    fn even_swap_count_returns_every_state() {
        // One crossing per pair on a two-state model: each trajectory swaps once
        // per joint period, so two periods restore every state.
        let spec = single(3, 5, (1, 4));
        let automaton = Automaton::new(&spec).unwrap();
        let period = joint_period(&spec).unwrap();
        for f in 0..15 {
            for p in 0..2 {
                let start = ClassicalState::new(p, fast_from_index(&spec.periods, f));
                let t = automaton.trajectory(&start, 2 * period);
                assert_eq!(t.values[period as usize], 1 - p);
                assert_eq!(*t.values.last().unwrap(), p);
            }
        }
    }

    #[test]
    fn simultaneous_overlapping_swaps_apply_in_canonical_order() {
        // (0,1) and (0,2) both fire at fast = (0,0,0).
        let spec = ModelSpec::new(
            vec![2, 3, 5],
            vec![CrossingPoint::new((0, 1), (0, 0), Sign::Plus), CrossingPoint::new((0, 2), (0, 0), Sign::Plus)],
        );
        let s = |p| ClassicalState::new(p, vec![0, 0, 0]);
        assert_eq!(step(&s(0), &spec).unwrap().primary, 1);
        assert_eq!(step(&s(1), &spec).unwrap().primary, 2);
        assert_eq!(step(&s(2), &spec).unwrap().primary, 0);
    }

    #[test]
    fn index_codec_round_trips() {
        let periods = [2, 3, 5];
        for f in 0..30 {
            assert_eq!(fast_to_index(&periods, &fast_from_index(&periods, f)), f);
        }
        assert_eq!(fast_from_index(&periods, 1), vec![0, 0, 1]);
    }
}
