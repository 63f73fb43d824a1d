//! Closed-form imaginarity-generating power (IGP) of unitaries.
//!
//! Everything here reduces to the single invariant `y = |Tr(U^dag U*)|^2`,
//! computed in O(d^2) as `|sum_ij U_ij^2|^2` because
//! `Tr(U^dag U*) = conj(Tr(U^T U))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_dims, ComplexSquareMatrix, OrthogonalMatrix, UnitaryMatrix, C64};
use crate::state::check_purity;

/// Which input ensemble an [`IgpValue`] was averaged over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "purity")]
pub enum PurityTag {
    /// Real states of this fixed purity.
    Fixed(f64),
    /// Real pure states.
    Pure,
    /// Purity averaged with the Bloch radius uniform.
    UniformAverage,
    /// Purity averaged under the Hilbert-Schmidt measure.
    HilbertSchmidtAverage,
    /// Haar average over unitaries, at this purity.
    HaarMean(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IgpValue {
    pub value: f64,
    pub dim: usize,
    pub purity: PurityTag,
}

/// Diagonal phases `theta_1..theta_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseProfile {
    thetas: Vec<f64>,
}

impl PhaseProfile {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::Empty);
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("phase profile has a non-finite entry".into()));
        }
        Ok(Self { thetas })
    }

    /// `0, pi/2, 0, pi/2, ...`; satisfies the maximality constraint for even `d`.
    pub fn alternating(d: usize) -> Self {
        Self {
            thetas: (0..d).map(|j| if j % 2 == 0 { 0.0 } else { std::f64::consts::FRAC_PI_2 }).collect(),
        }
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn dim(&self) -> usize {
        self.thetas.len()
    }

    /// `|sum_j exp(2 i theta_j)|`.
    pub fn constraint_residual(&self) -> f64 {
        self.thetas.iter().map(|&t| C64::from_polar(1.0, 2.0 * t)).sum::<C64>().norm()
    }
}

/// `M = U^dag U*`, a symmetric unitary.
pub fn m_matrix(u: &UnitaryMatrix) -> ComplexSquareMatrix {
    let a = u.as_inner();
    let m = a.adjoint() * a.map(|z| z.conj());
    debug_assert!((&m - m.transpose()).norm() <= 1e-10);
    ComplexSquareMatrix::from_inner(m)
}

/// `Tr(U^dag U*)` via the O(d^2) sum `conj(sum_ij U_ij^2)`.
pub fn trace_m(u: &UnitaryMatrix) -> C64 {
    u.as_inner().iter().map(|z| z * z).sum::<C64>().conj()
}

/// `y = |Tr(U^dag U*)|^2`. A real unitary is orthogonal, so `M = I` and
/// `y = d^2` exactly.
pub fn trace_sq(u: &UnitaryMatrix) -> f64 {
    if u.matrix().is_real() {
        let d = u.dim() as f64;
        return d * d;
    }
    trace_m(u).norm_sqr()
}

fn require_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { dim: d, min: 2 });
    }
    Ok(())
}

/// `(d^2 - y) / (2 d (d + 2))`, clamped at zero against rounding.
fn pure_from_trace_sq(d: usize, y: f64) -> f64 {
    let df = d as f64;
    ((df * df - y) / (2.0 * df * (df + 2.0))).max(0.0)
}

/// `(dP - 1) / (d - 1)`.
pub fn purity_factor(d: usize, p: f64) -> Result<f64> {
    require_dim(d)?;
    check_purity(d, p)?;
    let df = d as f64;
    Ok(((df * p - 1.0) / (df - 1.0)).clamp(0.0, 1.0))
}

/// IGP over real states of purity `P`.
pub fn igp_at_purity(u: &UnitaryMatrix, p: f64) -> Result<IgpValue> {
    let d = u.dim();
    let factor = purity_factor(d, p)?;
    Ok(IgpValue { value: pure_from_trace_sq(d, trace_sq(u)) * factor, dim: d, purity: PurityTag::Fixed(p) })
}

/// IGP over real pure states.
pub fn igp_pure(u: &UnitaryMatrix) -> IgpValue {
    let d = u.dim();
    IgpValue { value: pure_from_trace_sq(d, trace_sq(u)), dim: d, purity: PurityTag::Pure }
}

/// IGP averaged over purity with the Bloch radius uniform on `[0, sqrt(d-1)]`;
/// mean purity `(2 + d)/(3d)` gives a third of the pure value.
pub fn igp_avg_uniform(u: &UnitaryMatrix) -> IgpValue {
    let pure = igp_pure(u);
    IgpValue { value: pure.value / 3.0, purity: PurityTag::UniformAverage, ..pure }
}

/// IGP averaged over purity under the Hilbert-Schmidt measure.
pub fn igp_avg_hs(u: &UnitaryMatrix) -> IgpValue {
    let d = u.dim();
    let df = d as f64;
    let value = ((df * df - trace_sq(u)) * (df + 1.0) / (2.0 * df * (df + 2.0) * (df * df + 1.0))).max(0.0);
    IgpValue { value, dim: d, purity: PurityTag::HilbertSchmidtAverage }
}

/// Mean purity `2d/(d^2 + 1)` of Hilbert-Schmidt random states.
pub fn hs_mean_purity(d: usize) -> f64 {
    let df = d as f64;
    2.0 * df / (df * df + 1.0)
}

/// Purity `(r^2 + 1)/d` of a state at Bloch radius `r`.
pub fn purity_from_radius(r: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    if d == 0 || r.is_nan() || r < 0.0 || r > (df - 1.0).sqrt() + 1e-12 {
        return Err(Error::RadiusOutOfRange { radius: r, dim: d });
    }
    Ok(((r * r + 1.0) / df).min(1.0))
}

/// Haar average of the purity-constrained IGP, `(dP - 1)/(2(d + 1))`.
pub fn haar_mean_igp(d: usize, p: f64) -> Result<IgpValue> {
    require_dim(d)?;
    check_purity(d, p)?;
    let df = d as f64;
    Ok(IgpValue { value: ((df * p - 1.0) / (2.0 * (df + 1.0))).max(0.0), dim: d, purity: PurityTag::HaarMean(p) })
}

/// Largest IGP over real pure states, `d / (2(d + 2))`.
pub fn igp_max(d: usize) -> Result<f64> {
    require_dim(d)?;
    let df = d as f64;
    Ok(df / (2.0 * (df + 2.0)))
}

pub fn igp_max_at_purity(d: usize, p: f64) -> Result<f64> {
    Ok(igp_max(d)? * purity_factor(d, p)?)
}

/// `(d^2 - y)/d^2`, the IGP as a fraction of its maximum at any purity.
pub fn igp_normalized(u: &UnitaryMatrix) -> f64 {
    normalized_from_trace_sq(u.dim(), trace_sq(u))
}

pub fn normalized_from_trace_sq(d: usize, y: f64) -> f64 {
    let d2 = (d * d) as f64;
    ((d2 - y) / d2).clamp(0.0, 1.0)
}

/// Generalized Pauli-Z together with whether it is free.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliZ {
    pub unitary: UnitaryMatrix,
    /// `m = 0 mod d`: real up to a global phase, IGP zero.
    pub is_free: bool,
}

/// `diag(exp(i pi j m / d))` for `j = 0..d-1`.
pub fn make_pauli_z_unitary(d: usize, m: i64) -> Result<PauliZ> {
    require_dim(d)?;
    let thetas: Vec<f64> = (0..d).map(|j| std::f64::consts::PI * (j as f64) * (m as f64) / d as f64).collect();
    let mut diag: Vec<C64> = thetas.iter().map(|&t| C64::from_polar(1.0, t)).collect();
    let is_free = m.rem_euclid(d as i64) == 0;
    if is_free {
        // Phases are integer multiples of pi; store them exactly as +-1.
        for (z, &t) in diag.iter_mut().zip(&thetas) {
            let k = (t / std::f64::consts::PI).round() as i64;
            *z = C64::new(if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 }, 0.0);
        }
    }
    let unitary = UnitaryMatrix::new_unchecked(ComplexSquareMatrix::from_diagonal(&diag)?);
    Ok(PauliZ { unitary, is_free })
}

pub const DEFAULT_PHASE_TOLERANCE: f64 = 1e-10;

/// `O1 diag(exp(i theta)) O2`, accepted only when the phases satisfy the
/// maximality constraint `|sum_j exp(2 i theta_j)| <= tolerance`.
pub fn make_max_igp_unitary(
    o1: &OrthogonalMatrix,
    theta: &PhaseProfile,
    o2: &OrthogonalMatrix,
    tolerance: f64,
) -> Result<UnitaryMatrix> {
    let d = theta.dim();
    check_dims(d, o1.dim())?;
    check_dims(d, o2.dim())?;
    let residual = theta.constraint_residual();
    if residual > tolerance {
        return Err(Error::PhaseConstraintViolated { residual, tolerance });
    }
    let diag = UnitaryMatrix::diagonal_phases(theta.thetas())?;
    o1.to_unitary().compose(&diag)?.compose(&o2.to_unitary())
}

/// `O1 U O2`, the action of a deterministic free superoperation.
pub fn free_superop_conjugate(
    u: &UnitaryMatrix,
    o1: &OrthogonalMatrix,
    o2: &OrthogonalMatrix,
) -> Result<UnitaryMatrix> {
    check_dims(u.dim(), o1.dim())?;
    check_dims(u.dim(), o2.dim())?;
    o1.to_unitary().compose(u)?.compose(&o2.to_unitary())
}
