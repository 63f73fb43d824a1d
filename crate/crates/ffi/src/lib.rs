//! C ABI for `igplab`.
//!
//! Every function returns an [`IgplabStatus`] and writes its result through
//! an out-pointer. On failure the message is kept per thread and can be
//! read with [`igplab_last_error_message`]. Unitaries are passed as opaque
//! handles that the caller releases with [`igplab_unitary_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use igplab::estimators::McConfig;
use igplab::{ComplexSquareMatrix, Error, Tolerances, UnitaryMatrix, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgplabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMatrix = 3,
    NotUnitary = 4,
    DimensionTooSmall = 5,
    DimensionMismatch = 6,
    PurityOutOfRange = 7,
    NumericalFailure = 8,
    Panic = 9,
}

/// Opaque validated unitary.
pub struct IgplabUnitary {
    inner: UnitaryMatrix,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IgplabProtocolResult {
    pub fidelity: f64,
    pub trace_sq: f64,
    pub igp_pure_inferred: f64,
    pub igp_direct: f64,
    pub residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IgplabEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> IgplabStatus {
    match err {
        Error::NotUnitary { .. } | Error::NotOrthogonal { .. } => IgplabStatus::NotUnitary,
        Error::DimensionTooSmall { .. } => IgplabStatus::DimensionTooSmall,
        Error::DimensionMismatch { .. } => IgplabStatus::DimensionMismatch,
        Error::PurityOutOfRange { .. } => IgplabStatus::PurityOutOfRange,
        Error::NotSquare { .. } | Error::NonFinite { .. } | Error::Empty => IgplabStatus::InvalidMatrix,
        Error::FactorizationFailed { .. } | Error::SamplerExhausted { .. } => IgplabStatus::NumericalFailure,
        _ => IgplabStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into a status code.
fn guard<F>(f: F) -> IgplabStatus
where
    F: FnOnce() -> Result<(), (IgplabStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            IgplabStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            IgplabStatus::Panic
        }
    }
}

fn lib<T>(r: igplab::Result<T>) -> Result<T, (IgplabStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (IgplabStatus, String) {
    (IgplabStatus::NullPointer, format!("{name} is null"))
}

/// # Safety
/// `p` must be null or valid for writes of `T`.
unsafe fn write_out<T>(p: *mut T, value: T, name: &str) -> Result<(), (IgplabStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `u` must be null or a handle returned by this library and not yet freed.
unsafe fn handle<'a>(u: *const IgplabUnitary) -> Result<&'a UnitaryMatrix, (IgplabStatus, String)> {
    u.as_ref().map(|h| &h.inner).ok_or_else(|| null("unitary"))
}

fn boxed(u: UnitaryMatrix) -> *mut IgplabUnitary {
    Box::into_raw(Box::new(IgplabUnitary { inner: u }))
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes). Returns the full message length without the
/// terminator, or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or valid for writes of `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn igplab_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Validate a `dim x dim` matrix given as row-major real and imaginary
/// parts and return a unitary handle.
///
/// # Safety
/// `re` and `im` must be valid for reads of `dim * dim` doubles; `out` must
/// be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn igplab_unitary_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut IgplabUnitary,
) -> IgplabStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("matrix data"));
        }
        if dim == 0 {
            return Err((IgplabStatus::InvalidMatrix, "dimension is zero".into()));
        }
        let n = dim.checked_mul(dim).ok_or((IgplabStatus::InvalidArgument, "dimension overflows".into()))?;
        let re = std::slice::from_raw_parts(re, n);
        let im = std::slice::from_raw_parts(im, n);
        let m = nalgebra::DMatrix::from_fn(dim, dim, |r, c| C64::new(re[r * dim + c], im[r * dim + c]));
        let u = lib(UnitaryMatrix::new(lib(ComplexSquareMatrix::new(m))?, &Tolerances::default()))?;
        write_out(out, boxed(u), "out")
    })
}

/// Generalized Pauli-Z `diag(exp(i pi j m / d))`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn igplab_unitary_pauli_z(dim: usize, m: i64, out: *mut *mut IgplabUnitary) -> IgplabStatus {
    guard(|| {
        let u = lib(igplab::make_pauli_z_unitary(dim, m))?.unitary;
        write_out(out, boxed(u), "out")
    })
}

/// Haar-random unitary drawn from `seed`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn igplab_unitary_haar(dim: usize, seed: u64, out: *mut *mut IgplabUnitary) -> IgplabStatus {
    guard(|| {
        let u = lib(igplab::haar_unitary(dim, &mut igplab::RngStream::new(seed, 0).rng()))?;
        write_out(out, boxed(u), "out")
    })
}

/// Haar-random real orthogonal matrix drawn from `seed`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn igplab_unitary_orthogonal(
    dim: usize,
    seed: u64,
    out: *mut *mut IgplabUnitary,
) -> IgplabStatus {
    guard(|| {
        let o = lib(igplab::haar_orthogonal(dim, &mut igplab::RngStream::new(seed, 0).rng()))?;
        write_out(out, boxed(o.to_unitary()), "out")
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `u` must be null or a live handle from this library; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn igplab_unitary_free(u: *mut IgplabUnitary) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// Dimension of the unitary, or 0 for a null handle.
///
/// # Safety
/// `u` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn igplab_unitary_dim(u: *const IgplabUnitary) -> usize {
    u.as_ref().map_or(0, |h| h.inner.dim())
}

/// `|Tr(U^dag U*)|^2`.
///
/// # Safety
/// `u` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_trace_sq(u: *const IgplabUnitary, out: *mut f64) -> IgplabStatus {
    guard(|| {
        let u = handle(u)?;
        write_out(out, igplab::trace_sq(u), "out")
    })
}

/// IGP over real pure states.
///
/// # Safety
/// `u` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_igp_pure(u: *const IgplabUnitary, out: *mut f64) -> IgplabStatus {
    guard(|| {
        let u = handle(u)?;
        write_out(out, igplab::igp_pure(u).value, "out")
    })
}

/// IGP divided by its maximum, `1 - |Tr(U^dag U*)|^2 / d^2`.
///
/// # Safety
/// `u` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_igp_normalized(u: *const IgplabUnitary, out: *mut f64) -> IgplabStatus {
    guard(|| {
        let u = handle(u)?;
        write_out(out, igplab::igp_normalized(u), "out")
    })
}

/// IGP averaged over purity with uniform Bloch radius.
///
/// # Safety
/// `u` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_igp_avg_uniform(u: *const IgplabUnitary, out: *mut f64) -> IgplabStatus {
    guard(|| {
        let u = handle(u)?;
        write_out(out, igplab::igp_avg_uniform(u).value, "out")
    })
}

/// IGP averaged over Hilbert-Schmidt random real states.
///
/// # Safety
/// `u` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_igp_avg_hs(u: *const IgplabUnitary, out: *mut f64) -> IgplabStatus {
    guard(|| {
        let u = handle(u)?;
        write_out(out, igplab::igp_avg_hs(u).value, "out")
    })
}

/// IGP over real states of purity `purity`.
///
/// # Safety
/// `u` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_igp_at_purity(u: *const IgplabUnitary, purity: f64, out: *mut f64) -> IgplabStatus {
    guard(|| {
        let v = lib(igplab::igp_at_purity(handle(u)?, purity))?.value;
        write_out(out, v, "out")
    })
}

/// Simulate the fidelity protocol.
///
/// # Safety
/// `u` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_protocol_run(u: *const IgplabUnitary, out: *mut IgplabProtocolResult) -> IgplabStatus {
    guard(|| {
        let r = lib(igplab::run_fidelity_protocol(handle(u)?))?;
        let c = IgplabProtocolResult {
            fidelity: r.fidelity,
            trace_sq: r.trace_sq,
            igp_pure_inferred: r.igp_pure_inferred,
            igp_direct: r.igp_direct,
            residual: r.residual,
        };
        write_out(out, c, "out")
    })
}

/// Haar mean of the IGP at purity `purity`, `(d P - 1) / (2 (d + 1))`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_haar_mean_igp(dim: usize, purity: f64, out: *mut f64) -> IgplabStatus {
    guard(|| {
        let v = lib(igplab::haar_mean_igp(dim, purity))?.value;
        write_out(out, v, "out")
    })
}

/// Largest pure-state IGP in dimension `dim`, `d / (2 (d + 2))`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_igp_max(dim: usize, out: *mut f64) -> IgplabStatus {
    guard(|| {
        let v = lib(igplab::igp_max(dim))?;
        write_out(out, v, "out")
    })
}

/// Monte Carlo Haar mean of the IGP over `n` unitaries split across
/// `streams` workers. Deterministic in `(seed, streams)`.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn igplab_mc_haar_mean_igp(
    dim: usize,
    purity: f64,
    n: u64,
    seed: u64,
    streams: u32,
    out: *mut IgplabEstimate,
) -> IgplabStatus {
    guard(|| {
        let n = usize::try_from(n).map_err(|_| (IgplabStatus::InvalidArgument, "n too large".into()))?;
        let cfg = McConfig::new(seed, streams.max(1) as usize);
        let e = lib(igplab::estimators::mc_haar_mean_igp(dim, purity, n, &cfg))?;
        write_out(out, IgplabEstimate { mean: e.mean, stderr: e.stderr, n: e.n as u64 }, "out")
    })
}
