//! Building an automaton whose effective generator approximates a target.
//!
//! State `i` gets the `i`-th prime of a ladder starting at `lambda`. Pair
//! `(i, j)` gets `n_ij = round(2 L_i L_j δt |g_ji| / π)` crossings, spread
//! evenly in trigger time along the pair's joint orbit. Rounding bounds the
//! entry error by `π / (4 L_i L_j δt)`, which shrinks as `lambda⁻²`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{validate_spec, CrossingPoint, ModelSpec, Sign};
use crate::numbers::consecutive_primes;
use crate::quantum::{build_generator, complexify, Generator, HermitianMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub pair: (usize, usize),
    pub periods: (u64, u64),
    pub count: u64,
    pub target: f64,
    pub achieved: f64,
    pub error: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport {
    pub spec: ModelSpec,
    pub achieved: Generator,
    pub target: Generator,
    pub pairs: Vec<PairReport>,
    /// Pairs with a nonzero target whose crossing count rounded to zero.
    pub dropped: Vec<(usize, usize)>,
    /// Largest `n_ij / (L_i L_j)`.
    pub perturbativity: f64,
    pub warnings: Vec<String>,
}

impl SynthesisReport {
    pub fn max_error(&self) -> f64 {
        self.pairs.iter().map(|p| p.error).fold(0.0, f64::max)
    }

    pub fn within_bounds(&self) -> bool {
        self.pairs.iter().all(|p| p.error <= p.bound)
    }
}

/// `n` consecutive primes from the smallest prime `>= lambda`.
pub fn choose_periods(n: usize, lambda: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one primary state".into()));
    }
    if lambda < 2 {
        return Err(Error::InvalidArgument(format!("lambda must be at least 2, got {lambda}")));
    }
    Ok(consecutive_primes(lambda, n))
}

/// Sites for `count` crossings with trigger times `⌊s L_i L_j / count⌋`
/// measured from the origin of the `(i, j)` sublattice.
pub fn place_crossings(count: u64, li: u64, lj: u64) -> Vec<(u64, u64)> {
    let sub = li as u128 * lj as u128;
    (0..count as u128)
        .map(|s| {
            let t = s * sub / count as u128;
            ((t % li as u128) as u64, (t % lj as u128) as u64)
        })
        .collect()
}

pub fn synthesize(target: &Generator, lambda: u64) -> Result<SynthesisReport> {
    let dim = target.dim();
    let periods = choose_periods(dim, lambda)?;
    let dt = target.delta_t();
    let dt_f = dt.as_f64();

    let mut crossings = Vec::new();
    let mut counts = Vec::new();
    for (i, j, g) in target.pairs() {
        if !g.is_finite() {
            return Err(Error::InvalidArgument(format!("target entry ({j}, {i}) is not finite")));
        }
        let (li, lj) = (periods[i], periods[j]);
        let capacity = li as u128 * lj as u128;
        let exact = g.abs() * 2.0 * capacity as f64 * dt_f / PI;
        let rounded = exact.round();
        if rounded > capacity as f64 {
            return Err(Error::Unreachable { i, j, needed: rounded as u128, capacity });
        }
        let n = rounded as u64;
        let sign = Sign::of(g);
        crossings.extend(place_crossings(n, li, lj).into_iter().map(|site| CrossingPoint::new((i, j), site, sign)));
        counts.push(((i, j), n));
    }

    let mut spec = ModelSpec::new(periods.clone(), crossings).with_delta_t(dt);
    spec.n_primary = dim;
    let achieved = build_generator(&spec)?;

    let mut pairs = Vec::with_capacity(counts.len());
    let mut dropped = Vec::new();
    let mut perturbativity: f64 = 0.0;
    for ((i, j), n) in counts {
        let (li, lj) = (periods[i], periods[j]);
        let sub = li as f64 * lj as f64;
        let t = target.get(j, i);
        let a = achieved.get(j, i);
        if n == 0 && t != 0.0 {
            dropped.push((i, j));
        }
        perturbativity = perturbativity.max(n as f64 / sub);
        pairs.push(PairReport {
            pair: (i, j),
            periods: (li, lj),
            count: n,
            target: t,
            achieved: a,
            error: (t - a).abs(),
            bound: PI / (4.0 * sub * dt_f),
        });
    }

    let mut warnings: Vec<String> = dropped
        .iter()
        .map(|(i, j)| format!("coupling on pair ({i}, {j}) rounded to zero crossings and was dropped"))
        .collect();
    warnings.extend(validate_spec(&spec).warnings().map(|w| w.to_string()));

    Ok(SynthesisReport { spec, achieved, target: target.clone(), pairs, dropped, perturbativity, warnings })
}

/// Complexifies `h` and synthesizes the doubled real generator; the spec is
/// marked `cbit_doubled`.
pub fn synthesize_hermitian(h: &HermitianMatrix, lambda: u64, subtract_trace: bool) -> Result<SynthesisReport> {
    let h = if subtract_trace { h.trace_subtracted() } else { h.clone() };
    let mut report = synthesize(&complexify(&h), lambda)?;
    report.spec.cbit_doubled = true;
    Ok(report)
}
