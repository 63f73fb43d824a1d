//! Validated complex square matrices and the unitary / orthogonal wrappers
//! every analytic in the crate consumes.
//!
//! Validation happens once, at construction. Downstream code trusts the
//! wrapper types and never re-checks them.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Numerical tolerances used by every validating constructor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub unitary: f64,
    pub norm: f64,
    pub psd: f64,
    pub trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            unitary: 1e-10,
            norm: 1e-10,
            psd: 1e-9,
            trace: 1e-10,
        }
    }
}

/// A finite, nonempty, square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSquareMatrix {
    inner: DMatrix<C64>,
}

impl ComplexSquareMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::Empty);
        }
        for c in 0..cols {
            for r in 0..rows {
                let z = inner[(r, c)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(Self { inner })
    }

    /// Build from row-major nested rows of complex entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare { rows: n, cols: row.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self { inner: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { inner: DMatrix::zeros(dim, dim) }
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Skips the finiteness scan for matrices produced by arithmetic on
    /// already validated inputs.
    pub(crate) fn from_inner(inner: DMatrix<C64>) -> Self {
        debug_assert!(inner.is_square());
        Self { inner }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self::from_inner(self.inner.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self::from_inner(self.inner.transpose())
    }

    pub fn conjugate(&self) -> Self {
        Self::from_inner(self.inner.map(|z| z.conj()))
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.inner.iter().all(|z| z.im == 0.0)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.inner.iter().fold(0.0, |m, z| m.max(z.im.abs()))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::from_inner(&self.inner * &other.inner))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self::from_inner(&self.inner - &other.inner))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_inner(self.inner.map(|z| z * factor))
    }

    /// Row-major nested rows, the layout used by the JSON matrix format.
    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.inner[(r, c)]).collect())
            .collect()
    }
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Squared Hilbert-Schmidt norm `Tr(A^dag A)`.
pub fn hs_norm_sq(a: &ComplexSquareMatrix) -> f64 {
    a.inner.iter().map(|z| z.norm_sqr()).sum()
}

/// Kronecker product with row-major block order:
/// `(A (x) B)[i*dB + k, j*dB + l] = A[i,j] * B[k,l]`.
pub fn tensor(a: &ComplexSquareMatrix, b: &ComplexSquareMatrix) -> ComplexSquareMatrix {
    ComplexSquareMatrix::from_inner(a.inner.kronecker(&b.inner))
}

/// `(A (x) B) v` without materializing the product operator.
///
/// With `v` indexed as `i*dB + k`, reshaping it into the `dA x dB` matrix
/// `V[i,k]` turns the action into `A V B^T`.
pub fn tensor_apply(
    a: &ComplexSquareMatrix,
    b: &ComplexSquareMatrix,
    v: &[C64],
) -> Result<Vec<C64>> {
    let (da, db) = (a.dim(), b.dim());
    check_dims(da * db, v.len())?;
    let reshaped = DMatrix::from_row_slice(da, db, v);
    let out = &a.inner * reshaped * b.inner.transpose();
    let mut flat = Vec::with_capacity(da * db);
    for i in 0..da {
        for k in 0..db {
            flat.push(out[(i, k)]);
        }
    }
    Ok(flat)
}

/// `||A^dag A - I||_2`.
pub(crate) fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let g = m.adjoint() * m;
    let mut s = 0.0;
    for c in 0..n {
        for r in 0..n {
            let target = if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            s += (g[(r, c)] - target).norm_sqr();
        }
    }
    s.sqrt()
}

/// A complex unitary matrix, `||U^dag U - I||_2 <= tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    mat: ComplexSquareMatrix,
}

impl UnitaryMatrix {
    pub fn new(mat: ComplexSquareMatrix, tol: &Tolerances) -> Result<Self> {
        let deviation = unitarity_defect(&mat.inner);
        if deviation > tol.unitary {
            return Err(Error::NotUnitary { deviation, tolerance: tol.unitary });
        }
        Ok(Self { mat })
    }

    pub(crate) fn new_unchecked(mat: ComplexSquareMatrix) -> Self {
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(ComplexSquareMatrix::identity(dim))
    }

    /// `diag(exp(i theta_j))`.
    pub fn diagonal_phases(thetas: &[f64]) -> Result<Self> {
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("phase profile has a non-finite entry".into()));
        }
        let diag: Vec<C64> = thetas.iter().map(|&t| C64::from_polar(1.0, t)).collect();
        Ok(Self::new_unchecked(ComplexSquareMatrix::from_diagonal(&diag)?))
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.mat
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.mat.inner
    }

    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.mat.adjoint())
    }

    /// Product of two unitaries; stays unitary without re-validation.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<Self> {
        Ok(Self::new_unchecked(self.mat.mul(&other.mat)?))
    }
}

/// A real orthogonal matrix carried as a complex matrix whose imaginary
/// parts are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix {
    mat: ComplexSquareMatrix,
}

impl OrthogonalMatrix {
    pub fn new(mat: ComplexSquareMatrix, tol: &Tolerances) -> Result<Self> {
        if !mat.is_real() {
            return Err(Error::NotOrthogonal {
                reason: format!("max |Im| = {:.3e}, expected exactly 0", mat.max_abs_imag()),
            });
        }
        let deviation = unitarity_defect(&mat.inner);
        if deviation > tol.unitary {
            return Err(Error::NotOrthogonal {
                reason: format!("||O^T O - I||_2 = {deviation:.3e} exceeds {:.1e}", tol.unitary),
            });
        }
        Ok(Self { mat })
    }

    pub fn from_real(real: &DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        Self::new(ComplexSquareMatrix::new(real.map(|x| C64::new(x, 0.0)))?, tol)
    }

    pub(crate) fn from_real_unchecked(real: &DMatrix<f64>) -> Self {
        Self { mat: ComplexSquareMatrix::from_inner(real.map(|x| C64::new(x, 0.0))) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: ComplexSquareMatrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexSquareMatrix {
        &self.mat
    }

    pub fn as_inner(&self) -> &DMatrix<C64> {
        &self.mat.inner
    }

    pub fn to_real(&self) -> DMatrix<f64> {
        self.mat.inner.map(|z| z.re)
    }

    pub fn transpose(&self) -> Self {
        Self { mat: self.mat.transpose() }
    }

    pub fn to_unitary(&self) -> UnitaryMatrix {
        UnitaryMatrix::new_unchecked(self.mat.clone())
    }
}

/// JSON wire format: `{"dim": d, "re": [[...]], "im": [[...]]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&ComplexSquareMatrix> for MatrixFile {
    fn from(m: &ComplexSquareMatrix) -> Self {
        let rows = m.to_rows();
        MatrixFile {
            dim: m.dim(),
            re: rows.iter().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            im: rows.iter().map(|r| r.iter().map(|z| z.im).collect()).collect(),
        }
    }
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<ComplexSquareMatrix> {
        let d = self.dim;
        if d == 0 {
            return Err(parse_err("dim", None, "must be positive"));
        }
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != d {
                return Err(parse_err(name, None, &format!("expected {d} rows, found {}", part.len())));
            }
            for (r, row) in part.iter().enumerate() {
                if row.len() != d {
                    return Err(parse_err(
                        &format!("{name}[{r}]"),
                        None,
                        &format!("expected {d} entries, found {}", row.len()),
                    ));
                }
            }
        }
        ComplexSquareMatrix::new(DMatrix::from_fn(d, d, |r, c| C64::new(self.re[r][c], self.im[r][c])))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| parse_err("matrix", Some(e.line()), &e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix file serializes")
    }
}

fn parse_err(field: &str, line: Option<usize>, message: &str) -> Error {
    Error::Parse { field: field.to_string(), line, message: message.to_string() }
}
