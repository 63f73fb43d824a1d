//! The Hilbert-Schmidt imaginarity of a state and the real unital channels
//! under which it is monotone.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{check_dims, ComplexSquareMatrix, OrthogonalMatrix, Tolerances, UnitaryMatrix, C64};
use crate::state::DensityMatrix;

/// `||(rho - rho*)/2||_2^2`, summed directly over the imaginary parts.
pub fn imaginarity_norm_form(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.im * z.im).sum()
}

/// `(Tr rho^2 - Tr rho rho*) / 2`, evaluated as two generic traces.
pub fn imaginarity_trace_form(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut tr_sq = C64::new(0.0, 0.0);
    let mut tr_conj = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            tr_sq += m[(i, j)] * m[(j, i)];
            tr_conj += m[(i, j)] * m[(j, i)].conj();
        }
    }
    0.5 * (tr_sq - tr_conj).re
}

pub(crate) fn imaginarity_raw(m: &DMatrix<C64>) -> f64 {
    let norm = imaginarity_norm_form(m);
    debug_assert!(
        (norm - imaginarity_trace_form(m)).abs() <= 1e-12,
        "imaginarity forms disagree: {norm} vs {}",
        imaginarity_trace_form(m)
    );
    norm
}

/// Imaginarity of `rho` in the computational basis.
pub fn imaginarity(rho: &DensityMatrix) -> f64 {
    imaginarity_raw(rho.as_inner())
}

/// Reference basis `B' = V B`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    v: UnitaryMatrix,
}

impl BasisChange {
    pub fn new(v: UnitaryMatrix) -> Self {
        Self { v }
    }

    pub fn identity(dim: usize) -> Self {
        Self { v: UnitaryMatrix::identity(dim) }
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.v
    }

    /// Representation `V^dag X V` of an operator in the new basis.
    pub fn represent(&self, x: &ComplexSquareMatrix) -> Result<ComplexSquareMatrix> {
        check_dims(self.v.dim(), x.dim())?;
        let v = self.v.as_inner();
        Ok(ComplexSquareMatrix::from_inner(v.adjoint() * x.as_inner() * v))
    }
}

/// Imaginarity of `rho` relative to the basis `b`.
pub fn imaginarity_in_basis(rho: &DensityMatrix, b: &BasisChange) -> Result<f64> {
    let rep = b.represent(rho.matrix())?;
    Ok(imaginarity_raw(rep.as_inner()))
}

/// Finite mixture of orthogonal conjugations `rho -> sum_i p_i O_i rho O_i^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealUnitalChannel {
    terms: Vec<(f64, OrthogonalMatrix)>,
}

impl RealUnitalChannel {
    pub fn new(terms: Vec<(f64, OrthogonalMatrix)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidChannel { reason: "no Kraus terms".into() });
        };
        let d = first.dim();
        let mut total = 0.0;
        for (k, (p, o)) in terms.iter().enumerate() {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::InvalidChannel { reason: format!("weight {k} = {p} outside (0, 1]") });
            }
            check_dims(d, o.dim())?;
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChannel { reason: format!("weights sum to {total}") });
        }
        Ok(Self { terms })
    }

    pub fn single(o: OrthogonalMatrix) -> Self {
        Self { terms: vec![(1.0, o)] }
    }

    pub fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }

    pub fn terms(&self) -> &[(f64, OrthogonalMatrix)] {
        &self.terms
    }

    pub(crate) fn apply_raw(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let d = m.nrows();
        let mut out = DMatrix::<C64>::zeros(d, d);
        for (p, o) in &self.terms {
            let o = o.as_inner();
            out += (o * m * o.transpose()).map(|z| z * *p);
        }
        out
    }
}

/// Applies `ch` and re-validates the output as a density matrix.
pub fn apply_channel(ch: &RealUnitalChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    check_dims(ch.dim(), rho.dim())?;
    let out = ComplexSquareMatrix::from_inner(ch.apply_raw(rho.as_inner()));
    DensityMatrix::validate(&out, &Tolerances::default())
}
