//! Factorization `M = O D O^T` of a symmetric unitary `M` with `O` real
//! orthogonal and `D` diagonal unimodular.
//!
//! Writing `M = A + iB`, the real symmetric parts `A` and `B` commute, so
//! one orthogonal basis diagonalizes both. We diagonalize `A`, group its
//! eigenvalues into clusters, and diagonalize `B` inside each cluster.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::matrix::{unitarity_defect, ComplexSquareMatrix, OrthogonalMatrix, C64};
use crate::sampling::SampleRng;

const INPUT_TOLERANCE: f64 = 1e-8;
const RESIDUAL_TOLERANCE: f64 = 1e-8;
const CLUSTER_GAP: f64 = 1e-7;
const MAX_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TakagiFactors {
    pub o: OrthogonalMatrix,
    /// Diagonal of `D`, each of unit modulus.
    pub d: Vec<C64>,
    /// `||M - O D O^T||_2`.
    pub residual: f64,
}

impl TakagiFactors {
    pub fn reconstruct(&self) -> ComplexSquareMatrix {
        let o = self.o.as_inner();
        let mut od = o.clone();
        for (j, &dj) in self.d.iter().enumerate() {
            for i in 0..od.nrows() {
                od[(i, j)] *= dj;
            }
        }
        ComplexSquareMatrix::from_inner(od * o.transpose())
    }
}

/// Factor a symmetric unitary. On a failed residual check the input is
/// rotated by a random global phase `exp(i phi)`, which mixes `A` and `B`
/// and separates accidental clusters, and the attempt is repeated.
pub fn takagi_symmetric_unitary(m: &ComplexSquareMatrix, rng: &mut SampleRng) -> Result<TakagiFactors> {
    let inner = m.as_inner();
    let symmetry = (inner - inner.transpose()).norm();
    let unitarity = unitarity_defect(inner);
    if symmetry > INPUT_TOLERANCE || unitarity > INPUT_TOLERANCE {
        return Err(Error::NotSymmetricUnitary { symmetry, unitarity });
    }
    // Exact symmetrization; the defect is below tolerance already.
    let sym = (inner + inner.transpose()).map(|z| z * 0.5);

    let mut best = f64::INFINITY;
    for attempt in 0..=MAX_RETRIES {
        let phase = if attempt == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::from_polar(1.0, std::f64::consts::TAU * rng.uniform())
        };
        let rotated = sym.map(|z| z * phase);
        let o = joint_diagonalizer(&rotated);
        let d: Vec<C64> = (0..o.ncols())
            .map(|j| {
                let col = o.column(j);
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..o.nrows() {
                    for b in 0..o.nrows() {
                        acc += col[a] * inner[(a, b)] * col[b];
                    }
                }
                let n = acc.norm();
                if n > 0.0 { acc / n } else { C64::new(1.0, 0.0) }
            })
            .collect();
        let factors = TakagiFactors { o: OrthogonalMatrix::from_real_unchecked(&o), d, residual: 0.0 };
        let residual = (inner - factors.reconstruct().as_inner()).norm();
        let orth = unitarity_defect(factors.o.as_inner());
        if residual <= RESIDUAL_TOLERANCE && orth <= 1e-10 {
            return Ok(TakagiFactors { residual, ..factors });
        }
        best = best.min(residual.max(orth));
    }
    Err(Error::FactorizationFailed { residual: best, attempts: MAX_RETRIES + 1 })
}

/// Orthogonal `O` diagonalizing both `Re(M)` and `Im(M)`.
fn joint_diagonalizer(m: &DMatrix<C64>) -> DMatrix<f64> {
    let n = m.nrows();
    let a = m.map(|z| z.re);
    let b = m.map(|z| z.im);
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let mut o = vecs.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[end - 1] <= CLUSTER_GAP {
            end += 1;
        }
        if end - start > 1 {
            let block = vecs.columns(start, end - start).into_owned();
            let small = block.transpose() * &b * &block;
            let small = (&small + small.transpose()) * 0.5;
            let inner = SymmetricEigen::new(small);
            let rotated = block * inner.eigenvectors;
            o.columns_mut(start, end - start).copy_from(&rotated);
        }
        start = end;
    }
    o
}
