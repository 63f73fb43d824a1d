//! Density matrices, pure state vectors, purity and fidelity.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{ComplexSquareMatrix, Tolerances, C64};

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexSquareMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity, then the trace, then positivity of the
    /// Hermitian part. The stored matrix is the symmetrized one.
    pub fn validate(m: &ComplexSquareMatrix, tol: &Tolerances) -> Result<Self> {
        let inner = m.as_inner();
        let deviation = (inner - inner.adjoint()).norm();
        if deviation > tol.hermitian {
            return Err(Error::NotHermitian { deviation, tolerance: tol.hermitian });
        }
        let herm: DMatrix<C64> = (inner + inner.adjoint()).map(|z| z * 0.5);
        let trace = herm.trace().re;
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne {
                trace,
                deviation: (trace - 1.0).abs(),
                tolerance: tol.trace,
            });
        }
        let min_eigenvalue = herm
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_eigenvalue < -tol.psd {
            return Err(Error::NotPositive { min_eigenvalue, tolerance: tol.psd });
        }
        Ok(Self { mat: ComplexSquareMatrix::from_inner(herm) })
    }

    /// For matrices that are density matrices by construction (unitary
    /// conjugates and orthogonal mixtures of validated states).
    pub(crate) fn new_unchecked(mat: ComplexSquareMatrix) -> Self {
        Self { mat }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new_unchecked(ComplexSquareMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)))
    }

    /// `|psi><psi|`.
    pub fn from_pure(psi: &PureStateVector) -> Self {
        let a = psi.amplitudes();
        let d = a.len();
        Self::new_unchecked(ComplexSquareMatrix::from_inner(DMatrix::from_fn(d, d, |r, c| {
            a[r] * a[c].conj()
        })))
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.mat
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        self.mat.as_inner()
    }
}

/// Accepts `1/d <= P <= 1` up to a 1e-12 rounding slack.
pub fn check_purity(d: usize, p: f64) -> Result<()> {
    let lo = 1.0 / d as f64;
    if d == 0 || !p.is_finite() || p < lo - 1e-12 || p > 1.0 + 1e-12 {
        return Err(Error::PurityOutOfRange { purity: p, dim: d });
    }
    Ok(())
}

/// `Tr(rho^2)`, clamped to `[1/d - 1e-9, 1 + 1e-9]`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    // Hermitian, so Tr(rho^2) = sum |rho_ij|^2.
    let p: f64 = rho.as_inner().iter().map(|z| z.norm_sqr()).sum();
    let d = rho.dim() as f64;
    p.clamp(1.0 / d - 1e-9, 1.0 + 1e-9)
}

/// Unit-norm complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    amplitudes: Vec<C64>,
}

impl PureStateVector {
    pub fn new(amplitudes: Vec<C64>, tol: &Tolerances) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        if amplitudes.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("state vector has a non-finite entry".into()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized { norm, tolerance: tol.norm });
        }
        Ok(Self { amplitudes })
    }

    pub(crate) fn new_unchecked(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidArgument(format!("basis index {index} >= dim {dim}")));
        }
        let mut a = vec![C64::new(0.0, 0.0); dim];
        a[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: a })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let w = C64::from_polar(1.0, phase);
        Self { amplitudes: self.amplitudes.iter().map(|z| z * w).collect() }
    }
}

/// `(1/sqrt d) sum_i |ii>`, amplitude at index `i*d + i`.
pub fn max_entangled_state(d: usize) -> Result<PureStateVector> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    let mut a = vec![C64::new(0.0, 0.0); d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        a[i * d + i] = C64::new(amp, 0.0);
    }
    Ok(PureStateVector::new_unchecked(a))
}

/// `<psi|rho|psi>`.
pub fn fidelity_pure(psi: &PureStateVector, rho: &DensityMatrix) -> Result<f64> {
    let d = rho.dim();
    if psi.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi.dim() });
    }
    let a = psi.amplitudes();
    let m = rho.as_inner();
    let mut f = C64::new(0.0, 0.0);
    for r in 0..d {
        let mut row = C64::new(0.0, 0.0);
        for c in 0..d {
            row += m[(r, c)] * a[c];
        }
        f += a[r].conj() * row;
    }
    debug_assert!(f.im.abs() <= 1e-10, "fidelity has imaginary part {}", f.im);
    Ok(f.re.clamp(0.0, 1.0))
}

/// `|<phi|psi>|^2`, the fidelity of `phi` with the pure state `|psi><psi|`.
pub fn overlap_fidelity(phi: &PureStateVector, psi: &PureStateVector) -> Result<f64> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: phi.dim(), found: psi.dim() });
    }
    let ov: C64 = phi.amplitudes().iter().zip(psi.amplitudes()).map(|(a, b)| a.conj() * b).sum();
    Ok(ov.norm_sqr().clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn validate_examples() {
        let mixed = ComplexSquareMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(DensityMatrix::validate(&mixed, &tol()).is_ok());

        let proj = ComplexSquareMatrix::from_real_rows(&[vec![1., 0.], vec![0., 0.]]).unwrap();
        assert!(DensityMatrix::validate(&proj, &tol()).is_ok());

        let bad = ComplexSquareMatrix::from_real_rows(&[vec![1., 1.], vec![1., -0.5]]).unwrap();
        match DensityMatrix::validate(&bad, &tol()) {
            Err(Error::TraceNotOne { trace, .. }) => assert!((trace - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        // Same matrix rescaled to unit trace: eigenvalues 3 and -2.
        let rescaled = bad.scale(c(2.0, 0.0));
        match DensityMatrix::validate(&rescaled, &tol()) {
            Err(Error::NotPositive { min_eigenvalue, .. }) => assert!((min_eigenvalue + 2.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexSquareMatrix::from_rows(&[vec![c(0.5, 0.), c(0.1, 0.)], vec![c(0.0, 0.), c(0.5, 0.)]])
            .unwrap();
        assert!(matches!(DensityMatrix::validate(&m, &tol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn purity_examples() {
        for d in 2..6 {
            let p = purity(&DensityMatrix::maximally_mixed(d));
            assert!((p - 1.0 / d as f64).abs() < 1e-15);
        }
        let proj = DensityMatrix::from_pure(&PureStateVector::basis(3, 1).unwrap());
        assert_eq!(purity(&proj), 1.0);
        let diag = ComplexSquareMatrix::from_real_rows(&[vec![0.7, 0.], vec![0., 0.3]]).unwrap();
        let rho = DensityMatrix::validate(&diag, &tol()).unwrap();
        assert!((purity(&rho) - 0.58).abs() < 1e-15);
    }

    #[test]
    fn max_entangled_examples() {
        let phi = max_entangled_state(2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (a, e) in phi.amplitudes().iter().zip([c(h, 0.), c(0., 0.), c(0., 0.), c(h, 0.)]) {
            assert!((a - e).norm() < 1e-15);
        }
        let phi3 = max_entangled_state(3).unwrap();
        for (k, a) in phi3.amplitudes().iter().enumerate() {
            let expect = if k % 4 == 0 { 1.0 / 3f64.sqrt() } else { 0.0 };
            assert!((a.re - expect).abs() < 1e-15 && a.im == 0.0);
        }
        for d in 2..10 {
            let n: f64 = max_entangled_state(d).unwrap().amplitudes().iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
        assert!(matches!(max_entangled_state(1), Err(Error::DimensionTooSmall { dim: 1, min: 2 })));
    }

    #[test]
    fn fidelity_examples() {
        let psi = PureStateVector::new(vec![c(0.6, 0.), c(0., 0.8)], &tol()).unwrap();
        let f = fidelity_pure(&psi, &DensityMatrix::from_pure(&psi)).unwrap();
        assert!((f - 1.0).abs() < 1e-15);

        let zero = PureStateVector::basis(2, 0).unwrap();
        let one = DensityMatrix::from_pure(&PureStateVector::basis(2, 1).unwrap());
        assert_eq!(fidelity_pure(&zero, &one).unwrap(), 0.0);

        let phi = max_entangled_state(2).unwrap();
        let f = fidelity_pure(&phi, &DensityMatrix::maximally_mixed(4)).unwrap();
        assert!((f - 0.25).abs() < 1e-15);

        assert!(matches!(
            fidelity_pure(&phi, &DensityMatrix::maximally_mixed(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn overlap_matches_density_route() {
        let phi = PureStateVector::new(vec![c(0.6, 0.), c(0., 0.8)], &tol()).unwrap();
        let psi = PureStateVector::new(vec![c(0., 0.8), c(0.6, 0.)], &tol()).unwrap();
        let a = overlap_fidelity(&phi, &psi).unwrap();
        let b = fidelity_pure(&phi, &DensityMatrix::from_pure(&psi)).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn state_vector_validation() {
        assert!(matches!(
            PureStateVector::new(vec![c(1., 0.), c(1., 0.)], &tol()),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(PureStateVector::new(vec![], &tol()), Err(Error::Empty)));
    }
}
