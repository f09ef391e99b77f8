//! C interface to `gerber-core`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free` function. Every fallible call returns a
//! [`GerberStatus`] and records a message retrievable with
//! [`gerber_last_error`] on the calling thread. Matrices are exchanged as
//! row-major `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gerber_core::gerber::covariance_from_gerber;
use gerber_core::ingest::synthesized_labels;
use gerber_core::{Analysis, GerberError, IngestOptions, ReturnMatrix, Variant, Verdict};
use ndarray::Array2;

pub const GERBER_VARIANT_ORIGINAL: u32 = 0;
pub const GERBER_VARIANT_GS1: u32 = 1;
pub const GERBER_VARIANT_GS2: u32 = 2;

pub const GERBER_VERDICT_PSD: u32 = 0;
pub const GERBER_VERDICT_BORDERLINE: u32 = 1;
pub const GERBER_VERDICT_NOT_PSD: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GerberStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed or degenerate input data.
    Data = 3,
    /// A statistic is undefined for this input (e.g. an asset never pierces).
    Precondition = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A validated return panel.
pub struct GerberReturns {
    inner: ReturnMatrix,
}

/// A computed co-movement matrix together with the per-asset sigmas it was
/// thresholded with.
pub struct GerberMatrix {
    inner: gerber_core::GerberMatrix,
    sigmas: Vec<f64>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GerberPsdReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// 1 if a Cholesky factorisation succeeded (possibly shifted).
    pub cholesky_ok: c_int,
    /// Diagonal shift used by the successful factorisation, 0 if none.
    pub cholesky_shift: f64,
    pub tolerance: f64,
    /// One of the `GERBER_VERDICT_*` constants.
    pub verdict: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(e: &GerberError) -> GerberStatus {
    if e.is_precondition() {
        GerberStatus::Precondition
    } else if matches!(e, GerberError::Io { .. }) {
        GerberStatus::Io
    } else {
        GerberStatus::Data
    }
}

struct Failure(GerberStatus, String);

impl From<GerberError> for Failure {
    fn from(e: GerberError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GerberStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> GerberStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GerberStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {message}"));
            GerberStatus::Panic
        }
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn variant_from(code: u32) -> Result<Variant, Failure> {
    match code {
        GERBER_VARIANT_ORIGINAL => Ok(Variant::Original),
        GERBER_VARIANT_GS1 => Ok(Variant::Gs1),
        GERBER_VARIANT_GS2 => Ok(Variant::Gs2),
        _ => Err(Failure(
            GerberStatus::InvalidArgument,
            format!("unknown variant {code}"),
        )),
    }
}

unsafe fn copy_out(values: &Array2<f64>, out: *mut f64, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    let needed = values.len();
    if len < needed {
        return Err(Failure(
            GerberStatus::BufferTooSmall,
            format!("buffer holds {len} values, {needed} needed"),
        ));
    }
    let dst = std::slice::from_raw_parts_mut(out, needed);
    for (d, s) in dst.iter_mut().zip(values.iter()) {
        *d = *s;
    }
    Ok(())
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn gerber_status_string(status: c_int) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid argument",
        3 => c"invalid data",
        4 => c"precondition failed",
        5 => c"i/o error",
        6 => c"buffer too small",
        7 => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Message for the last failed call on this thread, or null if the last call
/// succeeded. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn gerber_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a panel from `periods * assets` row-major values (one row per
/// period). Asset labels are `A1..AK`.
///
/// # Safety
/// `data` must point to `periods * assets` readable doubles and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gerber_returns_from_rows(
    data: *const f64,
    periods: usize,
    assets: usize,
    out: *mut *mut GerberReturns,
) -> GerberStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = periods.checked_mul(assets).ok_or_else(|| {
            Failure(
                GerberStatus::InvalidArgument,
                "periods * assets overflows".into(),
            )
        })?;
        let values = std::slice::from_raw_parts(data, len).to_vec();
        let values = Array2::from_shape_vec((periods, assets), values)
            .map_err(|e| Failure(GerberStatus::InvalidArgument, e.to_string()))?;
        let inner = ReturnMatrix::new(values, synthesized_labels(assets), None)?;
        *out = Box::into_raw(Box::new(GerberReturns { inner }));
        Ok(())
    })
}

/// Loads a comma-separated panel with a header row of asset labels. When
/// `period_column` is non-zero the first column holds period labels.
///
/// # Safety
/// `path` must be a NUL-terminated UTF-8 string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gerber_returns_load_csv(
    path: *const c_char,
    period_column: c_int,
    out: *mut *mut GerberReturns,
) -> GerberStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(GerberStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let options = IngestOptions {
            period_column: period_column != 0,
            ..Default::default()
        };
        let inner = gerber_core::load_returns(path, &options)?;
        *out = Box::into_raw(Box::new(GerberReturns { inner }));
        Ok(())
    })
}

/// Number of periods, or 0 for a null handle.
///
/// # Safety
/// `returns` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gerber_returns_periods(returns: *const GerberReturns) -> usize {
    returns.as_ref().map_or(0, |r| r.inner.periods())
}

/// Number of assets, or 0 for a null handle.
///
/// # Safety
/// `returns` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gerber_returns_assets(returns: *const GerberReturns) -> usize {
    returns.as_ref().map_or(0, |r| r.inner.assets())
}

/// # Safety
/// `returns` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gerber_returns_free(returns: *mut GerberReturns) {
    if !returns.is_null() {
        drop(Box::from_raw(returns));
    }
}

/// Computes one co-movement statistic (`GERBER_VARIANT_*`) at threshold
/// fraction `c`.
///
/// # Safety
/// `returns` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gerber_compute(
    returns: *const GerberReturns,
    variant: u32,
    c: f64,
    out: *mut *mut GerberMatrix,
) -> GerberStatus {
    guard(|| {
        let returns = handle(returns, "returns")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let variant = variant_from(variant)?;
        let analysis = Analysis::new(&returns.inner, c)?;
        let inner = analysis.gerber(variant)?;
        *out = Box::into_raw(Box::new(GerberMatrix {
            inner,
            sigmas: analysis.sigmas,
        }));
        Ok(())
    })
}

/// Matrix dimension K, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gerber_matrix_assets(matrix: *const GerberMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.inner.assets())
}

/// Copies the K*K matrix entries, row-major, into `out`.
///
/// # Safety
/// `matrix` must be a live handle; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gerber_matrix_values(
    matrix: *const GerberMatrix,
    out: *mut f64,
    len: usize,
) -> GerberStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        copy_out(&m.inner.values, out, len)
    })
}

/// Copies the implied covariance `diag(sigma) G diag(sigma)`, row-major.
///
/// # Safety
/// `matrix` must be a live handle; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gerber_matrix_covariance(
    matrix: *const GerberMatrix,
    out: *mut f64,
    len: usize,
) -> GerberStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        let cov = covariance_from_gerber(&m.inner, &m.sigmas)?;
        copy_out(&cov, out, len)
    })
}

/// Copies the per-asset sigmas (K values) into `out`.
///
/// # Safety
/// `matrix` must be a live handle; `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gerber_matrix_sigmas(
    matrix: *const GerberMatrix,
    out: *mut f64,
    len: usize,
) -> GerberStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        let sigmas =
            Array2::from_shape_vec((1, m.sigmas.len()), m.sigmas.clone()).expect("row vector");
        copy_out(&sigmas, out, len)
    })
}

/// Writes the NUL-terminated label of asset `index` into `buf`. `needed`, if
/// non-null, receives the required size including the terminator, also when
/// the buffer is too small.
///
/// # Safety
/// `matrix` must be a live handle; `buf` must hold `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gerber_matrix_label(
    matrix: *const GerberMatrix,
    index: usize,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> GerberStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        let label = m.inner.labels().get(index).ok_or_else(|| {
            Failure(
                GerberStatus::InvalidArgument,
                format!(
                    "asset index {index} out of range for {} assets",
                    m.inner.assets()
                ),
            )
        })?;
        let bytes = label.as_bytes();
        if let Some(n) = needed.as_mut() {
            *n = bytes.len() + 1;
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < bytes.len() + 1 {
            return Err(Failure(
                GerberStatus::BufferTooSmall,
                format!("label needs {} bytes", bytes.len() + 1),
            ));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
        *buf.add(bytes.len()) = 0;
        Ok(())
    })
}

/// Eigenvalue and Cholesky check of the matrix. `tolerance <= 0` selects the
/// library default.
///
/// # Safety
/// `matrix` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gerber_matrix_check_psd(
    matrix: *const GerberMatrix,
    tolerance: f64,
    out: *mut GerberPsdReport,
) -> GerberStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let tolerance = if tolerance > 0.0 {
            tolerance
        } else {
            gerber_core::psd::DEFAULT_TOLERANCE
        };
        let r = gerber_core::check_psd(&m.inner.values, tolerance)?;
        *out = GerberPsdReport {
            lambda_min: r.lambda_min,
            lambda_max: r.lambda_max,
            cholesky_ok: c_int::from(r.cholesky_ok),
            cholesky_shift: r.cholesky_shift.unwrap_or(0.0),
            tolerance: r.tolerance,
            verdict: match r.verdict {
                Verdict::Psd => GERBER_VERDICT_PSD,
                Verdict::Borderline => GERBER_VERDICT_BORDERLINE,
                Verdict::NotPsd => GERBER_VERDICT_NOT_PSD,
            },
        };
        Ok(())
    })
}

/// # Safety
/// `matrix` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gerber_matrix_free(matrix: *mut GerberMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}
