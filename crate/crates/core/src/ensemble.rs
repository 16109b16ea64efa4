//! Classical primary-state marginals over an even distribution of the fast
//! phases, by full enumeration or seeded Monte Carlo.
//!
//! Fast initial conditions are uniform on the lattice and independent of the
//! primary, which is drawn from `p0`. Work is split into chunks whose integer
//! histograms are summed, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::automaton::{fast_from_index, Automaton};
use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Default cap on enumerated trajectory-steps.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

const CHUNKS: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
    Quantum,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
            Method::Quantum => "quantum",
        }
    }
}

/// Probability of each primary state at each time step.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSeries {
    pub times: Vec<u64>,
    pub probs: Vec<Vec<f64>>,
    pub stderr: Option<Vec<Vec<f64>>>,
    pub method: Method,
    pub sample_count: Option<u64>,
}

impl MarginalSeries {
    pub fn dim(&self) -> usize {
        self.probs.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|Σ_i p_i − 1|` over all times.
    pub fn normalization_defect(&self) -> f64 {
        self.probs.iter().map(|p| (p.iter().sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Merges c-bit partners `i` and `i + N/2` into logical-state marginals.
    pub fn fold_cbit(&self) -> Result<MarginalSeries> {
        let n = self.dim();
        if !n.is_multiple_of(2) {
            return Err(Error::OddCbitDimension(n));
        }
        let m = n / 2;
        let probs: Vec<Vec<f64>> = self.probs.iter().map(|p| (0..m).map(|i| p[i] + p[i + m]).collect()).collect();
        let stderr = match (self.stderr.as_ref(), self.sample_count) {
            (Some(_), Some(count)) => Some(binomial_stderr(&probs, count)),
            _ => None,
        };
        Ok(MarginalSeries {
            times: self.times.clone(),
            probs,
            stderr,
            method: self.method,
            sample_count: self.sample_count,
        })
    }
}

fn binomial_stderr(probs: &[Vec<f64>], n: u64) -> Vec<Vec<f64>> {
    probs.iter().map(|row| row.iter().map(|&p| (p * (1.0 - p) / n as f64).max(0.0).sqrt()).collect()).collect()
}

pub fn check_distribution(p0: &[f64], n: usize) -> Result<()> {
    if p0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p0.len() });
    }
    if p0.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidArgument("initial distribution has a negative or non-finite entry".into()));
    }
    let total: f64 = p0.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("initial distribution sums to {total}, not 1")));
    }
    Ok(())
}

/// Integer occupation counts from full enumeration: for each tracked starting
/// primary, how many of the `∏ L_i` fast initial conditions sit in primary
/// `i` at step `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCounts {
    pub volume: u64,
    pub starts: Vec<usize>,
    pub t_max: u64,
    pub n: usize,
    counts: Vec<u64>,
}

impl ExactCounts {
    pub fn count(&self, start_slot: usize, t: u64, i: usize) -> u64 {
        self.counts[self.offset(start_slot, t) + i]
    }

    pub fn row(&self, start_slot: usize, t: u64) -> &[u64] {
        let o = self.offset(start_slot, t);
        &self.counts[o..o + self.n]
    }

    fn offset(&self, start_slot: usize, t: u64) -> usize {
        (start_slot * (self.t_max as usize + 1) + t as usize) * self.n
    }
}

/// Trajectory-steps needed to enumerate `spec` up to `t_max`.
pub fn enumeration_cost(spec: &ModelSpec, t_max: u64) -> Result<u128> {
    Ok(spec.fast_volume()? as u128 * t_max.max(1) as u128)
}

/// Enumerates every fast initial condition for each primary in `starts`.
pub fn exact_counts(spec: &ModelSpec, starts: &[usize], t_max: u64, budget: u128) -> Result<ExactCounts> {
    let automaton = Automaton::new(spec)?;
    if let Some(&bad) = starts.iter().find(|&&s| s >= spec.n_primary) {
        return Err(Error::InvalidArgument(format!("start state {bad} out of range")));
    }
    let required = enumeration_cost(spec, t_max)?;
    if required > budget {
        return Err(Error::BudgetExceeded { required, allowed: budget });
    }
    let volume = spec.fast_volume()?;
    let n = spec.n_primary;
    let rows = t_max as usize + 1;
    let size = starts.len() * rows * n;

    let chunk = volume.div_ceil(CHUNKS).max(1);
    let chunks: Vec<u64> = (0..volume.div_ceil(chunk)).collect();
    let counts = chunks
        .par_iter()
        .map(|&c| {
            let mut hist = vec![0u64; size];
            let mut current = vec![0usize; starts.len()];
            for f in c * chunk..((c + 1) * chunk).min(volume) {
                let mut fast = fast_from_index(&spec.periods, f);
                current.copy_from_slice(starts);
                for t in 0..rows {
                    for (slot, &p) in current.iter().enumerate() {
                        hist[(slot * rows + t) * n + p] += 1;
                    }
                    if t + 1 < rows {
                        automaton.for_each_firing(&fast, |i, j| {
                            for p in current.iter_mut() {
                                if *p == i {
                                    *p = j;
                                } else if *p == j {
                                    *p = i;
                                }
                            }
                        });
                        automaton.advance(&mut fast);
                    }
                }
            }
            hist
        })
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    Ok(ExactCounts { volume, starts: starts.to_vec(), t_max, n, counts })
}

/// Exact ensemble marginals for steps `0..=t_max`.
pub fn exact_marginals(spec: &ModelSpec, p0: &[f64], t_max: u64, budget: u128) -> Result<MarginalSeries> {
    check_distribution(p0, spec.n_primary)?;
    let starts: Vec<usize> = (0..p0.len()).filter(|&k| p0[k] > 0.0).collect();
    let counts = exact_counts(spec, &starts, t_max, budget)?;
    let volume = counts.volume as f64;
    let probs = (0..=t_max)
        .map(|t| {
            let mut row = vec![0.0; spec.n_primary];
            for (slot, &k) in starts.iter().enumerate() {
                for (i, &c) in counts.row(slot, t).iter().enumerate() {
                    if c != 0 {
                        row[i] += p0[k] * c as f64;
                    }
                }
            }
            row.iter_mut().for_each(|x| *x /= volume);
            row
        })
        .collect();
    Ok(MarginalSeries { times: (0..=t_max).collect(), probs, stderr: None, method: Method::Exact, sample_count: None })
}

/// Generator for sample `index`: the ChaCha stream number is the sample
/// index, so every sample is reproducible in isolation.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_primary(rng: &mut impl Rng, cumulative: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>() * cumulative.last().copied().unwrap_or(1.0);
    cumulative.iter().position(|&c| u < c).unwrap_or_else(|| {
        // u landed on the top edge; take the last state with weight.
        cumulative.windows(2).rposition(|w| w[1] > w[0]).map_or(0, |p| p + 1)
    })
}

/// Monte Carlo estimate of the ensemble marginals from `n_samples`
/// independently seeded trajectories.
pub fn sample_marginals(spec: &ModelSpec, p0: &[f64], t_max: u64, n_samples: u64, seed: u64) -> Result<MarginalSeries> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    check_distribution(p0, spec.n_primary)?;
    let automaton = Automaton::new(spec)?;
    let n = spec.n_primary;
    let rows = t_max as usize + 1;
    let cumulative: Vec<f64> = p0
        .iter()
        .scan(0.0, |acc, &p| {
            *acc += p;
            Some(*acc)
        })
        .collect();

    let chunk = n_samples.div_ceil(CHUNKS).max(1);
    let chunks: Vec<u64> = (0..n_samples.div_ceil(chunk)).collect();
    let counts = chunks
        .par_iter()
        .map(|&c| {
            let mut hist = vec![0u64; rows * n];
            for s in c * chunk..((c + 1) * chunk).min(n_samples) {
                let mut rng = sample_rng(seed, s);
                let mut fast: Vec<u64> = spec.periods.iter().map(|&l| rng.random_range(0..l)).collect();
                let mut primary = draw_primary(&mut rng, &cumulative);
                for t in 0..rows {
                    hist[t * n + primary] += 1;
                    if t + 1 < rows {
                        primary = automaton.fire(&fast, primary);
                        automaton.advance(&mut fast);
                    }
                }
            }
            hist
        })
        .reduce(
            || vec![0u64; rows * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let probs: Vec<Vec<f64>> =
        counts.chunks(n).map(|row| row.iter().map(|&c| c as f64 / n_samples as f64).collect()).collect();
    let stderr = binomial_stderr(&probs, n_samples);
    Ok(MarginalSeries {
        times: (0..=t_max).collect(),
        probs,
        stderr: Some(stderr),
        method: Method::MonteCarlo,
        sample_count: Some(n_samples),
    })
}
