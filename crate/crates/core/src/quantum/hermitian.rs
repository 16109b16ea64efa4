use nalgebra::{Complex, DMatrix};

use super::Generator;
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// `H = A + iB` with `A` real symmetric and `B` real antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl HermitianMatrix {
    pub fn new(re: DMatrix<f64>, im: DMatrix<f64>) -> Result<Self> {
        if !re.is_square() || re.shape() != im.shape() {
            return Err(Error::DimensionMismatch { expected: re.nrows(), found: im.ncols() });
        }
        if re.iter().chain(im.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("Hamiltonian has a non-finite entry".into()));
        }
        let deviation = (&re - re.transpose()).amax().max((&im + im.transpose()).amax());
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(HermitianMatrix { re, im })
    }

    pub fn real(re: DMatrix<f64>) -> Result<Self> {
        let im = DMatrix::zeros(re.nrows(), re.ncols());
        HermitianMatrix::new(re, im)
    }

    pub fn from_complex(h: &DMatrix<Complex<f64>>) -> Result<Self> {
        HermitianMatrix::new(h.map(|z| z.re), h.map(|z| z.im))
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    pub fn to_complex(&self) -> DMatrix<Complex<f64>> {
        self.re.zip_map(&self.im, Complex::new)
    }

    /// `H − (tr H / M)·I`; removes a global phase invisible to the Born rule.
    pub fn trace_subtracted(&self) -> Self {
        let m = self.dim();
        if m == 0 {
            return self.clone();
        }
        let shift = self.re.trace() / m as f64;
        HermitianMatrix { re: &self.re - DMatrix::identity(m, m) * shift, im: self.im.clone() }
    }
}

/// Real `2M × 2M` generator `[[B, A], [−A, B]]` whose flow on `(ψ_R, ψ_I)`
/// is `dψ/dt = −iHψ`.
pub fn complexify(h: &HermitianMatrix) -> Generator {
    let m = h.dim();
    let mut g = Generator::zeros(2 * m);
    for r in 0..m {
        for c in 0..r {
            g.set(r, c, h.im[(r, c)]);
            g.set(r + m, c + m, h.im[(r, c)]);
        }
    }
    // Lower-left block is −A; the upper-right +A follows by antisymmetry.
    for r in 0..m {
        for c in 0..m {
            g.set(r + m, c, -h.re[(r, c)]);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{born, evolve, RealWave};

    #[test]
    fn scalar_energy_is_a_phase() {
        let h = HermitianMatrix::real(DMatrix::from_element(1, 1, 2.5)).unwrap();
        let g = complexify(&h);
        assert_eq!(g.to_matrix(), DMatrix::from_row_slice(2, 2, &[0.0, 2.5, -2.5, 0.0]));
        for psi in evolve(&g, &RealWave::basis(2, 0), &[0, 1, 7, 100]).unwrap() {
            assert!((born(&psi, true).unwrap()[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pauli_x_block_form() {
        let h = HermitianMatrix::real(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let g = complexify(&h);
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
            -1.0, 0.0, 0.0, 0.0,
        ]);
        assert_eq!(g.to_matrix(), expected);
        let times: Vec<u64> = (0..10).collect();
        for (t, psi) in times.iter().zip(evolve(&g, &RealWave::basis(4, 0), &times).unwrap()) {
            // exp(−iσ_x t)|0⟩ = (cos t, −i sin t).
            let p = born(&psi, true).unwrap();
            assert!((p[0] - (*t as f64).cos().powi(2)).abs() < 1e-12);
            assert!((psi.values[3] + (*t as f64).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn imaginary_hamiltonian_decouples() {
        let b = DMatrix::from_row_slice(2, 2, &[0.0, -0.3, 0.3, 0.0]);
        let h = HermitianMatrix::new(DMatrix::zeros(2, 2), b.clone()).unwrap();
        let g = complexify(&h).to_matrix();
        assert_eq!(g.view((0, 0), (2, 2)), b);
        assert_eq!(g.view((2, 2), (2, 2)), b);
        assert!(g.view((0, 2), (2, 2)).iter().all(|&x| x == 0.0));
        assert!(g.view((2, 0), (2, 2)).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let re = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(matches!(HermitianMatrix::real(re), Err(Error::NotHermitian { .. })));
        let im = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.0]);
        assert!(HermitianMatrix::new(DMatrix::zeros(2, 2), im).is_err());
    }

    #[test]
    fn trace_subtraction() {
        let h = HermitianMatrix::real(DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 1.0])).unwrap();
        let t = h.trace_subtracted();
        assert!(t.re().trace().abs() < 1e-15);
        assert_eq!(t.re()[(0, 1)], 1.0);
    }
}
