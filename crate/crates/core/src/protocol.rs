//! Fidelity-based detection of the IGP: prepare `|phi+>`, apply `U (x) U`,
//! and read `|Tr(U^dag U*)|^2 = d^2 F` off the overlap with `|phi+>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::igp::{igp_pure, purity_factor};
use crate::matrix::{tensor_apply, UnitaryMatrix};
use crate::state::{max_entangled_state, overlap_fidelity, PureStateVector};

/// Largest tolerated gap between the inferred and the direct pure IGP.
pub const PROTOCOL_RESIDUAL_BOUND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub dim: usize,
    pub fidelity: f64,
    pub trace_sq: f64,
    pub igp_pure_inferred: f64,
    pub igp_direct: f64,
    pub residual: f64,
}

/// Simulate the protocol noiselessly. The `d^2`-dimensional output state
/// is materialized; the `d^2 x d^2` operator `U (x) U` is not.
pub fn run_fidelity_protocol(u: &UnitaryMatrix) -> Result<ProtocolResult> {
    let d = u.dim();
    let phi = max_entangled_state(d)?;
    let out = tensor_apply(u.matrix(), u.matrix(), phi.amplitudes())?;
    let fidelity = overlap_fidelity(&phi, &PureStateVector::new_unchecked(out))?;
    let df = d as f64;
    let trace_sq = df * df * fidelity;
    let igp_pure_inferred = ((df * df - trace_sq) / (2.0 * df * (df + 2.0))).max(0.0);
    let igp_direct = igp_pure(u).value;
    let residual = (igp_pure_inferred - igp_direct).abs();
    if residual > PROTOCOL_RESIDUAL_BOUND {
        return Err(Error::InvalidArgument(format!(
            "protocol residual {residual:e} exceeds {PROTOCOL_RESIDUAL_BOUND:e}; input is not unitary to working precision"
        )));
    }
    Ok(ProtocolResult { dim: d, fidelity, trace_sq, igp_pure_inferred, igp_direct, residual })
}

/// Protocol-inferred IGP rescaled to real states of purity `P`.
pub fn protocol_at_purity(u: &UnitaryMatrix, p: f64) -> Result<f64> {
    let factor = purity_factor(u.dim(), p)?;
    Ok(run_fidelity_protocol(u)?.igp_pure_inferred * factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::igp::{igp_at_purity, make_pauli_z_unitary};
    use crate::matrix::tensor;
    use crate::sampling::{haar_orthogonal, haar_unitary, RngStream};
    use crate::state::{fidelity_pure, DensityMatrix};

    #[test]
    fn orthogonal_gives_unit_fidelity() {
        let mut rng = RngStream::new(1, 0).rng();
        let o = haar_orthogonal(5, &mut rng).unwrap().to_unitary();
        let r = run_fidelity_protocol(&o).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert!(r.igp_pure_inferred.abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_examples() {
        let s = make_pauli_z_unitary(2, 1).unwrap().unitary;
        let r = run_fidelity_protocol(&s).unwrap();
        assert!(r.fidelity.abs() < 1e-15);
        assert!((r.igp_pure_inferred - 0.25).abs() < 1e-15);
        assert!((protocol_at_purity(&s, 0.75).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(protocol_at_purity(&s, 0.5).unwrap(), 0.0);

        let t = UnitaryMatrix::diagonal_phases(&[0.0, std::f64::consts::FRAC_PI_4]).unwrap();
        let r = run_fidelity_protocol(&t).unwrap();
        assert!((r.fidelity - 0.5).abs() < 1e-15);
        assert!((r.igp_pure_inferred - 0.125).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_dense_operator_route() {
        let mut rng = RngStream::new(2, 0).rng();
        for d in [2, 3, 4] {
            let u = haar_unitary(d, &mut rng).unwrap();
            let phi = max_entangled_state(d).unwrap();
            let uu = tensor(u.matrix(), u.matrix());
            let v = uu.as_inner() * nalgebra::DVector::from_column_slice(phi.amplitudes());
            let rho = DensityMatrix::from_pure(&PureStateVector::new_unchecked(v.iter().copied().collect()));
            let dense = fidelity_pure(&phi, &rho).unwrap();
            let fast = run_fidelity_protocol(&u).unwrap().fidelity;
            assert!((dense - fast).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_closed_form_at_purity() {
        let mut rng = RngStream::new(3, 0).rng();
        for d in [2, 3, 8] {
            let u = haar_unitary(d, &mut rng).unwrap();
            for p in [1.0 / d as f64, 0.6, 1.0] {
                let a = protocol_at_purity(&u, p).unwrap();
                let b = igp_at_purity(&u, p).unwrap().value;
                assert!((a - b).abs() <= 1e-10);
            }
        }
        assert!(protocol_at_purity(&UnitaryMatrix::identity(3), 0.2).is_err());
        assert!(matches!(
            run_fidelity_protocol(&UnitaryMatrix::identity(1)),
            Err(Error::DimensionTooSmall { .. })
        ));
    }
}
