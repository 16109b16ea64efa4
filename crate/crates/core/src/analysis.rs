//! Classical-versus-quantum comparison and precision sweeps.
//!
//! The distance between the two marginal series is total variation,
//! `½ Σ_i |P_classical,i − P_quantum,i|`, evaluated at every time step.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::ensemble::{enumeration_cost, exact_marginals, sample_marginals, MarginalSeries, Method};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::numbers::lcm_all;
use crate::quantum::{build_generator, quantum_marginals, Generator};
use crate::synthesis::synthesize;

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let d: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    (0.5 * d).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    /// `max_i |P_classical,i − P_quantum,i|`.
    pub max_abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub times: Vec<u64>,
    pub tv: Vec<f64>,
    pub max_tv: f64,
    pub argmax_t: u64,
    pub checkpoints: Vec<Checkpoint>,
    pub classical: MarginalSeries,
    pub quantum: MarginalSeries,
}

/// Compares two series on the same grid. Checkpoints are `t = 0` and the
/// multiples of `checkpoint_period` present in the grid; without a period
/// only the first time is used.
pub fn compare(
    classical: &MarginalSeries,
    quantum: &MarginalSeries,
    checkpoint_period: Option<u64>,
) -> Result<ComparisonReport> {
    if classical.times != quantum.times {
        return Err(Error::GridMismatch(format!(
            "classical series has {} time points, quantum series has {} (or the steps differ)",
            classical.len(),
            quantum.len()
        )));
    }
    if classical.is_empty() {
        return Err(Error::GridMismatch("series are empty".into()));
    }
    if classical.dim() != quantum.dim() {
        return Err(Error::GridMismatch(format!(
            "classical series covers {} states, quantum series {}",
            classical.dim(),
            quantum.dim()
        )));
    }
    let tv: Vec<f64> = classical.probs.iter().zip(&quantum.probs).map(|(p, q)| total_variation(p, q)).collect();
    let (arg, max_tv) =
        tv.iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, x)| if x > best.1 { (i, x) } else { best });

    let is_checkpoint = |t: u64| t == 0 || checkpoint_period.is_some_and(|p| p > 0 && t.is_multiple_of(p));
    let mut checkpoints: Vec<Checkpoint> = classical
        .times
        .iter()
        .enumerate()
        .filter(|(_, &t)| is_checkpoint(t))
        .map(|(k, &t)| Checkpoint { t, max_abs_dev: max_abs_dev(&classical.probs[k], &quantum.probs[k]) })
        .collect();
    if checkpoints.is_empty() {
        checkpoints.push(Checkpoint {
            t: classical.times[0],
            max_abs_dev: max_abs_dev(&classical.probs[0], &quantum.probs[0]),
        });
    }

    Ok(ComparisonReport {
        times: classical.times.clone(),
        tv,
        max_tv,
        argmax_t: classical.times[arg],
        checkpoints,
        classical: classical.clone(),
        quantum: quantum.clone(),
    })
}

fn max_abs_dev(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Period after which every crossing has fired a whole number of times:
/// the lcm of `L_i L_j` over pairs carrying crossings (the full joint period
/// when there are none).
pub fn checkpoint_period(spec: &ModelSpec) -> Result<u64> {
    let subs: Vec<u64> = spec
        .pair_counts()
        .keys()
        .map(|&(i, j)| spec.periods[i].checked_mul(spec.periods[j]).ok_or(Error::Overflow("sublattice size")))
        .collect::<Result<_>>()?;
    let subs = if subs.is_empty() { spec.periods.clone() } else { subs };
    lcm_all(&subs).ok_or(Error::Overflow("checkpoint period"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalMethod {
    Exact { budget: u128 },
    MonteCarlo { samples: u64, seed: u64 },
}

pub fn classical_marginals(
    spec: &ModelSpec,
    p0: &[f64],
    t_max: u64,
    method: ClassicalMethod,
) -> Result<MarginalSeries> {
    match method {
        ClassicalMethod::Exact { budget } => exact_marginals(spec, p0, t_max, budget),
        ClassicalMethod::MonteCarlo { samples, seed } => sample_marginals(spec, p0, t_max, samples, seed),
    }
}

/// Runs the automaton and its effective generator from `p0` over
/// `0..=t_max` and compares them on the logical states (c-bit partners
/// folded for doubled specs).
pub fn compare_spec(spec: &ModelSpec, p0: &[f64], t_max: u64, method: ClassicalMethod) -> Result<ComparisonReport> {
    let classical = classical_marginals(spec, p0, t_max, method)?;
    let times: Vec<u64> = (0..=t_max).collect();
    let quantum = quantum_marginals(&build_generator(spec)?, p0, &times)?;
    let (classical, quantum) =
        if spec.cbit_doubled { (classical.fold_cbit()?, quantum.fold_cbit()?) } else { (classical, quantum) };
    compare(&classical, &quantum, Some(checkpoint_period(spec)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// One period `2π / ω_min` of the smallest nonzero target coupling.
    QuantumPeriod,
    Steps(u64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub horizon: Horizon,
    /// Enumeration budget; rows above it fall back to Monte Carlo.
    pub budget: u128,
    pub samples: u64,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            horizon: Horizon::QuantumPeriod,
            budget: crate::ensemble::DEFAULT_BUDGET,
            samples: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: u64,
    pub periods: Vec<u64>,
    pub max_entry_err: f64,
    pub max_tv: f64,
    pub method: Method,
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub horizon: u64,
    pub rows: Vec<SweepRow>,
}

pub fn horizon_steps(target: &Generator, horizon: Horizon) -> u64 {
    match horizon {
        Horizon::Steps(t) => t,
        Horizon::QuantumPeriod => match target.min_nonzero_abs() {
            Some(w) => (2.0 * PI / (w * target.delta_t().as_f64())).ceil() as u64,
            None => 1,
        },
    }
}

/// For each `lambda`: synthesize an automaton for `target`, run it from `p0`
/// over the horizon, and measure both the generator entry error and the
/// largest TV distance to the target's own quantum evolution.
pub fn convergence_sweep(target: &Generator, lambdas: &[u64], p0: &[f64], options: SweepOptions) -> Result<SweepTable> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidArgument(format!("a sweep needs at least two lambda values, got {}", lambdas.len())));
    }
    if let Some(&l) = lambdas.iter().find(|&&l| l < 2) {
        return Err(Error::InvalidArgument(format!("lambda must be at least 2, got {l}")));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("lambda values must be strictly increasing".into()));
    }
    let t_max = horizon_steps(target, options.horizon);
    let times: Vec<u64> = (0..=t_max).collect();
    let quantum = quantum_marginals(target, p0, &times)?;

    let rows = lambdas
        .par_iter()
        .map(|&lambda| {
            let start = Instant::now();
            let report = synthesize(target, lambda)?;
            let method = if enumeration_cost(&report.spec, t_max)? <= options.budget {
                ClassicalMethod::Exact { budget: options.budget }
            } else {
                ClassicalMethod::MonteCarlo { samples: options.samples, seed: options.seed }
            };
            let classical = classical_marginals(&report.spec, p0, t_max, method)?;
            let cmp = compare(&classical, &quantum, None)?;
            Ok(SweepRow {
                lambda,
                periods: report.spec.periods.clone(),
                max_entry_err: report.max_error(),
                max_tv: cmp.max_tv,
                method: classical.method,
                runtime: start.elapsed(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { horizon: t_max, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::DEFAULT_BUDGET;
    use crate::model::{CrossingPoint, Sign};

    fn single(li: u64, lj: u64, sites: &[(u64, u64)]) -> ModelSpec {
        ModelSpec::new(vec![li, lj], sites.iter().map(|&s| CrossingPoint::new((0, 1), s, Sign::Plus)).collect())
    }

    const EXACT: ClassicalMethod = ClassicalMethod::Exact { budget: DEFAULT_BUDGET };

    #[test]
    fn identical_series_have_zero_distance() {
        let s = exact_marginals(&single(3, 5, &[(0, 0)]), &[1.0, 0.0], 20, DEFAULT_BUDGET).unwrap();
        let r = compare(&s, &s, Some(15)).unwrap();
        assert!(r.tv.iter().all(|&x| x == 0.0));
        assert_eq!(r.checkpoints.iter().map(|c| c.t).collect::<Vec<_>>(), vec![0, 15]);
    }

    #[test]
    fn triangle_versus_cosine() {
        let r = compare_spec(&single(3, 5, &[(0, 0)]), &[1.0, 0.0], 30, EXACT).unwrap();
        // Closed forms sampled on the integer grid.
        let worst = (0..=30)
            .map(|t| {
                let c = if t <= 15 { 1.0 - t as f64 / 15.0 } else { (t - 15) as f64 / 15.0 };
                (c - (PI * t as f64 / 30.0).cos().powi(2)).abs()
            })
            .fold(0.0, f64::max);
        assert!((r.max_tv - worst).abs() < 1e-12);
        assert!((r.max_tv - 0.105).abs() <= 0.005, "{}", r.max_tv);
        assert!([3, 12, 18, 27].contains(&r.argmax_t), "{}", r.argmax_t);
        for t in [0usize, 15, 30] {
            assert!(r.tv[t] < 1e-12);
        }
        assert_eq!(r.checkpoints.len(), 3);
    }

    #[test]
    fn parity_at_the_joint_period() {
        for n in 1..=3u64 {
            let sites: Vec<(u64, u64)> = crate::synthesis::place_crossings(n, 3, 5);
            let r = compare_spec(&single(3, 5, &sites), &[1.0, 0.0], 15, EXACT).unwrap();
            let expected = if n % 2 == 1 { vec![0.0, 1.0] } else { vec![1.0, 0.0] };
            assert_eq!(r.classical.probs[15], expected);
            for c in &r.checkpoints {
                assert!(c.max_abs_dev <= 1e-9, "n={n} {c:?}");
            }
        }
    }

    #[test]
    fn distance_is_symmetric() {
        let spec = single(5, 7, &[(1, 1), (4, 2)]);
        let c = exact_marginals(&spec, &[0.3, 0.7], 50, DEFAULT_BUDGET).unwrap();
        let q = quantum_marginals(&build_generator(&spec).unwrap(), &[0.3, 0.7], &c.times).unwrap();
        let ab = compare(&c, &q, None).unwrap();
        let ba = compare(&q, &c, None).unwrap();
        assert_eq!(ab.tv, ba.tv);
        assert!(ab.tv.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn grid_mismatch() {
        let spec = single(3, 5, &[(0, 0)]);
        let a = exact_marginals(&spec, &[1.0, 0.0], 10, DEFAULT_BUDGET).unwrap();
        let b = exact_marginals(&spec, &[1.0, 0.0], 12, DEFAULT_BUDGET).unwrap();
        assert!(matches!(compare(&a, &b, None), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn relocated_crossing_gives_identical_report() {
        let reference = compare_spec(&single(3, 5, &[(0, 0)]), &[1.0, 0.0], 30, EXACT).unwrap();
        for a in 0..3 {
            for b in 0..5 {
                let spec = single(3, 5, &[(a, b)]);
                assert_eq!(compare_spec(&spec, &[1.0, 0.0], 30, EXACT).unwrap(), reference);
            }
        }
    }

    #[test]
    fn checkpoint_periods() {
        assert_eq!(checkpoint_period(&single(3, 5, &[(0, 0)])).unwrap(), 15);
        assert_eq!(checkpoint_period(&single(3, 5, &[])).unwrap(), 15);
        let spec = ModelSpec::new(
            vec![2, 3, 5],
            vec![CrossingPoint::new((0, 1), (0, 0), Sign::Plus), CrossingPoint::new((1, 2), (0, 0), Sign::Plus)],
        );
        assert_eq!(checkpoint_period(&spec).unwrap(), 30);
    }

    #[test]
    fn sweep_for_weak_coupling() {
        let table =
            convergence_sweep(&Generator::rotation(0.01), &[5, 10, 20], &[1.0, 0.0], SweepOptions::default()).unwrap();
        assert_eq!(table.horizon, 629);
        let errs: Vec<f64> = table.rows.iter().map(|r| r.max_entry_err).collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert_eq!(table.rows[0].periods, vec![5, 7]);
        assert!(table.rows.iter().all(|r| r.method == Method::Exact));
        // λ=5 drops the coupling entirely, so the classical side never moves.
        assert!(table.rows[0].max_tv > 0.9);
    }

    #[test]
    fn sweep_guards() {
        let g = Generator::rotation(0.01);
        assert!(convergence_sweep(&g, &[10], &[1.0, 0.0], SweepOptions::default()).is_err());
        assert!(convergence_sweep(&g, &[1, 10], &[1.0, 0.0], SweepOptions::default()).is_err());
        assert!(convergence_sweep(&g, &[10, 10], &[1.0, 0.0], SweepOptions::default()).is_err());
    }

    #[test]
    fn sweep_of_zero_target() {
        let table = convergence_sweep(&Generator::zeros(2), &[5, 10], &[1.0, 0.0], SweepOptions::default()).unwrap();
        assert!(table.rows.iter().all(|r| r.max_entry_err == 0.0 && r.max_tv == 0.0));
    }

    #[test]
    fn sweep_falls_back_to_sampling() {
        let options = SweepOptions { budget: 10, samples: 500, seed: 1, horizon: Horizon::Steps(20) };
        let table = convergence_sweep(&Generator::rotation(0.05), &[5, 10], &[1.0, 0.0], options).unwrap();
        assert!(table.rows.iter().all(|r| r.method == Method::MonteCarlo));
    }
}
