use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("empty matrix or vector")]
    Empty,

    #[error("not Hermitian: ||M - M^dag||_2 = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("not positive semidefinite: smallest eigenvalue {min_eigenvalue:.3e} below -{tolerance:.1e}")]
    NotPositive { min_eigenvalue: f64, tolerance: f64 },

    #[error("trace is {trace} (|tr - 1| = {deviation:.3e} exceeds {tolerance:.1e})")]
    TraceNotOne { trace: f64, deviation: f64, tolerance: f64 },

    #[error("not unitary: ||U^dag U - I||_2 = {deviation:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("not real orthogonal: {reason}")]
    NotOrthogonal { reason: String },

    #[error("state vector norm is {norm} (tolerance {tolerance:.1e})")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("dimension {dim} is below the minimum {min}")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("purity {purity} outside [1/{dim}, 1]")]
    PurityOutOfRange { purity: f64, dim: usize },

    #[error("radius {radius} outside [0, sqrt({dim} - 1)]")]
    RadiusOutOfRange { radius: f64, dim: usize },

    #[error("phase constraint violated: |sum_j exp(2i theta_j)| = {residual:.3e} exceeds {tolerance:.1e}")]
    PhaseConstraintViolated { residual: f64, tolerance: f64 },

    #[error("input is not a symmetric unitary: symmetry defect {symmetry:.3e}, unitarity defect {unitarity:.3e}")]
    NotSymmetricUnitary { symmetry: f64, unitarity: f64 },

    #[error("factorization residual {residual:.3e} above tolerance after {attempts} attempts")]
    FactorizationFailed { residual: f64, attempts: usize },

    #[error("spectrum sampler exhausted after {attempts} attempts")]
    SamplerExhausted { attempts: usize },

    #[error("invalid channel: {reason}")]
    InvalidChannel { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {field}{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Parse {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
