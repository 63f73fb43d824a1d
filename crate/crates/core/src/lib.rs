//! Closed-form imaginarity-generating power of unitaries, with Monte Carlo
//! cross-checks.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod igp;
pub mod matrix;
pub mod measures;
pub mod protocol;
pub mod sampling;
pub mod state;
pub mod stats;
pub mod takagi;

pub use error::{Error, Result};
pub use igp::{
    haar_mean_igp, igp_at_purity, igp_avg_hs, igp_avg_uniform, igp_max, igp_max_at_purity, igp_normalized, igp_pure,
    m_matrix, make_max_igp_unitary, make_pauli_z_unitary, trace_sq, IgpValue, PhaseProfile,
};
pub use matrix::{hs_norm_sq, tensor, ComplexSquareMatrix, MatrixFile, OrthogonalMatrix, Tolerances, UnitaryMatrix, C64};
pub use measures::{apply_channel, imaginarity, imaginarity_in_basis, BasisChange, RealUnitalChannel};
pub use protocol::{protocol_at_purity, run_fidelity_protocol, ProtocolResult};
pub use sampling::{haar_orthogonal, haar_unitary, RngStream, SampleRng, Spectrum, SpectrumMode};
pub use state::{fidelity_pure, max_entangled_state, purity, DensityMatrix, PureStateVector};
pub use takagi::{takagi_symmetric_unitary, TakagiFactors};
