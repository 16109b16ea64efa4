//! The quantum side: effective slow-sector generator, real Schrödinger flow,
//! the Born rule, c-bit complexification and cycle spectra.
//!
//! A [`Generator`] `G` is real and antisymmetric and drives `dψ/dt = G ψ`;
//! it equals `−i H_slow`. Entries carry units of 1/time; evolving by `t`
//! steps applies `exp(G · t · δt)`.

mod hermitian;
mod spectrum;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_rational::Ratio;
use num_traits::ToPrimitive;

pub use hermitian::{complexify, HermitianMatrix};
pub use spectrum::{cycle_spectrum, Cycle, CycleSpectrum, Permutation};

use crate::ensemble::{check_distribution, MarginalSeries, Method};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, TimeQuantum};

/// Real antisymmetric matrix stored as its strictly lower triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    dim: usize,
    lower: Vec<f64>,
    delta_t: TimeQuantum,
}

#[inline]
fn tri(row: usize, col: usize) -> usize {
    debug_assert!(row > col);
    row * (row - 1) / 2 + col
}

impl Generator {
    pub fn zeros(dim: usize) -> Self {
        Generator { dim, lower: vec![0.0; dim * dim.saturating_sub(1) / 2], delta_t: TimeQuantum::ONE }
    }

    /// The 2×2 generator `[[0, −ω], [ω, 0]]`.
    pub fn rotation(omega: f64) -> Self {
        let mut g = Generator::zeros(2);
        g.set(1, 0, omega);
        g
    }

    /// Builds from a dense matrix whose antisymmetric defect
    /// `max |M + Mᵀ|` is at most `tol`; the strictly lower triangle is kept.
    pub fn from_matrix(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let dim = m.nrows();
        let mut deviation: f64 = 0.0;
        for r in 0..dim {
            for c in 0..=r {
                deviation = deviation.max((m[(r, c)] + m[(c, r)]).abs());
            }
        }
        if deviation > tol || m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotAntisymmetric { deviation });
        }
        let mut g = Generator::zeros(dim);
        for r in 1..dim {
            for c in 0..r {
                g.lower[tri(r, c)] = m[(r, c)];
            }
        }
        Ok(g)
    }

    pub fn with_delta_t(mut self, delta_t: TimeQuantum) -> Self {
        self.delta_t = delta_t;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta_t(&self) -> TimeQuantum {
        self.delta_t
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        use std::cmp::Ordering::*;
        match row.cmp(&col) {
            Equal => 0.0,
            Greater => self.lower[tri(row, col)],
            Less => -self.lower[tri(col, row)],
        }
    }

    /// Sets `G[row][col] = value` and `G[col][row] = −value`.
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        use std::cmp::Ordering::*;
        match row.cmp(&col) {
            Equal => panic!("generator diagonal is fixed at zero"),
            Greater => self.lower[tri(row, col)] = value,
            Less => self.lower[tri(col, row)] = -value,
        }
    }

    /// `(i, j, G[j][i])` for every pair `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..self.dim).flat_map(move |j| (0..j).map(move |i| (i, j, self.lower[tri(j, i)])))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.get(r, c))
    }

    pub fn max_abs(&self) -> f64 {
        self.lower.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Smallest nonzero `|G[j][i]|`, if any coupling is nonzero.
    pub fn min_nonzero_abs(&self) -> Option<f64> {
        self.lower.iter().map(|x| x.abs()).filter(|&x| x > 0.0).min_by(f64::total_cmp)
    }

    pub fn is_zero(&self) -> bool {
        self.lower.iter().all(|&x| x == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> DMatrix<f64> {
        self.to_matrix() * factor
    }
}

/// Exact coupling of one pair: `G[j][i] = π · coefficient`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCoupling {
    pub pair: (usize, usize),
    pub coefficient: Ratio<i128>,
}

/// The rational coefficients `(Σ_s sign_s) / (2 L_i L_j δt)` of every pair
/// that carries crossings.
pub fn exact_couplings(spec: &ModelSpec) -> Result<Vec<PairCoupling>> {
    spec.ensure_valid()?;
    let dt = spec.delta_t;
    Ok(spec
        .pair_counts()
        .into_iter()
        .map(|((i, j), count)| {
            let sub = spec.periods[i] as i128 * spec.periods[j] as i128;
            let coefficient = Ratio::new(count.signed as i128 * dt.denom() as i128, 2 * sub * dt.numer() as i128);
            PairCoupling { pair: (i, j), coefficient }
        })
        .collect())
}

pub fn coupling_value(coefficient: Ratio<i128>) -> f64 {
    let numer = coefficient.numer().to_f64().unwrap_or(f64::NAN);
    let denom = coefficient.denom().to_f64().unwrap_or(f64::NAN);
    PI * numer / denom
}

/// First-order slow-sector generator of the automaton.
pub fn build_generator(spec: &ModelSpec) -> Result<Generator> {
    let mut g = Generator::zeros(spec.n_primary).with_delta_t(spec.delta_t);
    for c in exact_couplings(spec)? {
        g.set(c.pair.1, c.pair.0, coupling_value(c.coefficient));
    }
    Ok(g)
}

/// `exp(G · time · δt)`, with `time` counted in steps.
pub fn propagator(g: &Generator, time: f64) -> DMatrix<f64> {
    let scale = time * g.delta_t.as_f64();
    match g.dim {
        0 => DMatrix::zeros(0, 0),
        1 => DMatrix::identity(1, 1),
        2 => {
            let theta = g.get(1, 0) * scale;
            let (s, c) = theta.sin_cos();
            DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
        }
        _ => g.scaled(scale).exp(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealWave {
    pub values: Vec<f64>,
}

impl RealWave {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("wave function has a non-finite entry".into()));
        }
        Ok(RealWave { values })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut values = vec![0.0; dim];
        values[index] = 1.0;
        RealWave { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// `ψ(t) = exp(G t δt) ψ0` for each step count in `times`.
pub fn evolve(g: &Generator, psi0: &RealWave, times: &[u64]) -> Result<Vec<RealWave>> {
    if psi0.dim() != g.dim {
        return Err(Error::DimensionMismatch { expected: g.dim, found: psi0.dim() });
    }
    let v = nalgebra::DVector::from_column_slice(&psi0.values);
    Ok(times.iter().map(|&t| RealWave { values: (propagator(g, t as f64) * &v).as_slice().to_vec() }).collect())
}

/// Born probabilities `ψ_i²`; with `cbit_doubled` the partners `i` and
/// `i + M` are summed.
pub fn born(psi: &RealWave, cbit_doubled: bool) -> Result<Vec<f64>> {
    let sq: Vec<f64> = psi.values.iter().map(|x| x * x).collect();
    if !cbit_doubled {
        return Ok(sq);
    }
    if !sq.len().is_multiple_of(2) {
        return Err(Error::OddCbitDimension(sq.len()));
    }
    let m = sq.len() / 2;
    Ok((0..m).map(|i| sq[i] + sq[i + m]).collect())
}

/// Marginals of the incoherent mixture `Σ_k p0_k |k⟩⟨k|` under the flow:
/// `P_i(t) = Σ_k p0_k U_ik(t)²`. For a basis-state `p0` this is the Born
/// rule applied to the evolved basis vector.
pub fn quantum_marginals(g: &Generator, p0: &[f64], times: &[u64]) -> Result<MarginalSeries> {
    check_distribution(p0, g.dim)?;
    let probs = times
        .iter()
        .map(|&t| {
            let u = propagator(g, t as f64);
            (0..g.dim).map(|i| p0.iter().enumerate().map(|(k, &w)| w * u[(i, k)] * u[(i, k)]).sum()).collect()
        })
        .collect();
    Ok(MarginalSeries { times: times.to_vec(), probs, stderr: None, method: Method::Quantum, sample_count: None })
}

/// Born-rule marginals of a pure real wave function over `times`.
pub fn wave_marginals(g: &Generator, psi0: &RealWave, times: &[u64], cbit_doubled: bool) -> Result<MarginalSeries> {
    let probs = evolve(g, psi0, times)?.iter().map(|psi| born(psi, cbit_doubled)).collect::<Result<Vec<_>>>()?;
    Ok(MarginalSeries { times: times.to_vec(), probs, stderr: None, method: Method::Quantum, sample_count: None })
}
