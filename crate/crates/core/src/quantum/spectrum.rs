//! Energy spectra of deterministic one-step maps.
//!
//! A permutation of `M` states splits into disjoint cycles. A cycle of length
//! `T` has the equidistant levels `E_n = 2πn / (T δt) + δE`, `n = 0..T`, and
//! its discrete Fourier modes are eigenvectors of the permutation matrix with
//! eigenvalues `exp(−i (E_n − δE) δt)`.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::model::TimeQuantum;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for (k, &img) in images.iter().enumerate() {
            if img >= images.len() {
                return Err(Error::NotPermutation(format!("image {img} of {k} is out of range")));
            }
            if std::mem::replace(&mut seen[img], true) {
                return Err(Error::NotPermutation(format!("{img} is the image of more than one element")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.images[k]
    }

    /// Disjoint cycles ordered by their smallest member, each listed from that
    /// member along the map.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut visited = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut k = start;
            while !visited[k] {
                visited[k] = true;
                cycle.push(k);
                k = self.images[k];
            }
            out.push(cycle);
        }
        out
    }

    /// `U` with `U|k⟩ = |π(k)⟩`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.len(), self.len());
        for (k, &img) in self.images.iter().enumerate() {
            u[(img, k)] = 1.0;
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub members: Vec<usize>,
    pub period: usize,
    pub offset: f64,
    pub energies: Vec<f64>,
}

impl Cycle {
    /// Adjacent level spacing `2π / (T δt)`.
    pub fn gap(&self, delta_t: TimeQuantum) -> f64 {
        2.0 * PI / (self.period as f64 * delta_t.as_f64())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleSpectrum {
    pub cycles: Vec<Cycle>,
    pub delta_t: TimeQuantum,
    /// Largest `‖U v − μ v‖` over the Fourier eigenvectors.
    pub max_residual: f64,
}

impl CycleSpectrum {
    /// Every `(cycle index, n, E_n)` triple.
    pub fn levels(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.cycles.iter().enumerate().flat_map(|(r, c)| c.energies.iter().enumerate().map(move |(n, &e)| (r, n, e)))
    }
}

/// Decomposes `images` into cycles and assigns each its level ladder.
/// `offsets` gives `δE_r` per cycle (in cycle order) and defaults to zero.
pub fn cycle_spectrum(images: &[usize], delta_t: TimeQuantum, offsets: Option<&[f64]>) -> Result<CycleSpectrum> {
    if !delta_t.is_positive() {
        return Err(Error::InvalidArgument("delta_t must be positive".into()));
    }
    let perm = Permutation::new(images.to_vec())?;
    let members = perm.cycles();
    if let Some(o) = offsets {
        if o.len() != members.len() {
            return Err(Error::DimensionMismatch { expected: members.len(), found: o.len() });
        }
    }
    let dt = delta_t.as_f64();
    let mut max_residual: f64 = 0.0;
    let cycles = members
        .into_iter()
        .enumerate()
        .map(|(r, members)| {
            let period = members.len();
            let offset = offsets.map_or(0.0, |o| o[r]);
            let energies: Vec<f64> = (0..period).map(|n| 2.0 * PI * n as f64 / (period as f64 * dt) + offset).collect();
            for n in 0..period {
                max_residual = max_residual.max(fourier_residual(&perm, &members, n));
            }
            Cycle { members, period, offset, energies }
        })
        .collect();
    Ok(CycleSpectrum { cycles, delta_t, max_residual })
}

/// Residual of `v_n = T^{-1/2} Σ_s e^{2πi n s / T} |m_s⟩` as an eigenvector of
/// `U` with eigenvalue `e^{−2πi n / T}`.
fn fourier_residual(perm: &Permutation, members: &[usize], n: usize) -> f64 {
    let t = members.len();
    let norm = 1.0 / (t as f64).sqrt();
    let theta = 2.0 * PI * n as f64 / t as f64;
    let mut v = vec![Complex::new(0.0, 0.0); perm.len()];
    for (s, &m) in members.iter().enumerate() {
        v[m] = Complex::from_polar(norm, theta * s as f64);
    }
    let mut uv = vec![Complex::new(0.0, 0.0); perm.len()];
    for &m in members {
        uv[perm.apply(m)] = v[m];
    }
    let mu = Complex::from_polar(1.0, -theta);
    members.iter().map(|&m| (uv[m] - mu * v[m]).norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_fixed_points() {
        let s = cycle_spectrum(&[0, 1, 2], TimeQuantum::ONE, None).unwrap();
        assert_eq!(s.cycles.len(), 3);
        assert!(s.cycles.iter().all(|c| c.period == 1 && c.energies == vec![0.0]));
        let s = cycle_spectrum(&[0, 1, 2], TimeQuantum::ONE, Some(&[0.5, -1.0, 2.0])).unwrap();
        let e: Vec<f64> = s.cycles.iter().map(|c| c.energies[0]).collect();
        assert_eq!(e, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn four_cycle_levels() {
        let s = cycle_spectrum(&[1, 2, 3, 0], TimeQuantum::ONE, None).unwrap();
        assert_eq!(s.cycles.len(), 1);
        let e = &s.cycles[0].energies;
        for (x, y) in e.iter().zip([0.0, PI / 2.0, PI, 3.0 * PI / 2.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(s.max_residual < 1e-12);
    }

    #[test]
    fn three_plus_two() {
        let s = cycle_spectrum(&[1, 2, 0, 4, 3], TimeQuantum::ONE, None).unwrap();
        let periods: Vec<usize> = s.cycles.iter().map(|c| c.period).collect();
        assert_eq!(periods, vec![3, 2]);
        assert!((s.cycles[0].gap(s.delta_t) - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((s.cycles[1].gap(s.delta_t) - PI).abs() < 1e-15);
        assert_eq!(s.cycles[0].members, vec![0, 1, 2]);
        assert_eq!(s.cycles[1].members, vec![3, 4]);
    }

    #[test]
    fn time_quantum_scales_levels() {
        let s = cycle_spectrum(&[1, 0], TimeQuantum::new(1, 2), None).unwrap();
        assert!((s.cycles[0].energies[1] - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(matches!(cycle_spectrum(&[0, 0, 1], TimeQuantum::ONE, None), Err(Error::NotPermutation(_))));
        assert!(matches!(cycle_spectrum(&[3, 0, 1], TimeQuantum::ONE, None), Err(Error::NotPermutation(_))));
        assert!(cycle_spectrum(&[1, 0], TimeQuantum::ONE, Some(&[0.0, 1.0])).is_err());
    }
}
