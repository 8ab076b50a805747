//! C ABI over `bfn-core`: opaque handles for configurations and reports,
//! status codes, and a per-thread last-error message.
//!
//! Every function returns a [`BfnStatus`]; outputs go through pointer
//! arguments. Handles are released with their `*_free` function, strings
//! returned by the library with [`bfn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bfn_core::bfn::{oracle_deviation, run_bfn, BfnConfig, BfnReport, OracleCase};
use bfn_core::burgers::{bn_sequence, inverse_square_coefficients};
use bfn_core::cli_io::{report_json, RunConfigFile, BN_MAX_N};
use bfn_core::BfnError;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfnStatus {
    Ok = 0,
    InvalidArgument = 1,
    UnsupportedRegime = 2,
    Truncation = 3,
    Crossing = 4,
    Stability = 5,
    Positivity = 6,
    NoOracle = 7,
    Config = 8,
    Io = 9,
    NullPointer = 10,
    Panic = 11,
}

/// Theory comparison selector for [`bfn_report_oracle`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfnOracle {
    Theorem1 = 0,
    Theorem4 = 1,
    Theorem6 = 2,
    Proposition7 = 3,
}

/// A parsed run configuration.
pub struct BfnConfigHandle {
    inner: BfnConfig,
}

/// The outcome of a BFN run.
pub struct BfnReportHandle {
    inner: BfnReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &BfnError) -> BfnStatus {
    match e {
        BfnError::InvalidGrid(_)
        | BfnError::InvalidField(_)
        | BfnError::InvalidGain(_)
        | BfnError::InvalidSpec(_)
        | BfnError::InvalidArgument(_) => BfnStatus::InvalidArgument,
        BfnError::UnsupportedRegime { .. } => BfnStatus::UnsupportedRegime,
        BfnError::Truncation { .. } => BfnStatus::Truncation,
        BfnError::Crossing { .. } => BfnStatus::Crossing,
        BfnError::Stability { .. } => BfnStatus::Stability,
        BfnError::Positivity { .. } => BfnStatus::Positivity,
        BfnError::NoOracle(_) => BfnStatus::NoOracle,
        BfnError::Config(_) => BfnStatus::Config,
        BfnError::Io(_) => BfnStatus::Io,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (BfnStatus, String)>) -> BfnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BfnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            BfnStatus::Panic
        }
    }
}

fn core_err(e: BfnError) -> (BfnStatus, String) {
    let msg = match e.anchor() {
        Some(anchor) => format!("[{anchor}] {e}"),
        None => e.to_string(),
    };
    (status_of(&e), msg)
}

fn null(what: &str) -> (BfnStatus, String) {
    (BfnStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn bfn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses `key = value` configuration text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfn_config_from_text(text: *const c_char, out: *mut *mut BfnConfigHandle) -> BfnStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (BfnStatus::InvalidArgument, "config text is not UTF-8".to_string()))?;
        let inner = RunConfigFile::parse(s)
            .and_then(|c| c.to_bfn_config())
            .map_err(core_err)?;
        *out = Box::into_raw(Box::new(BfnConfigHandle { inner }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`bfn_config_from_text`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bfn_config_free(handle: *mut BfnConfigHandle) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Runs the configured iterations.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfn_run(config: *const BfnConfigHandle, out: *mut *mut BfnReportHandle) -> BfnStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = run_bfn(&cfg.inner).map_err(core_err)?;
        *out = Box::into_raw(Box::new(BfnReportHandle { inner }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`bfn_run`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bfn_report_free(handle: *mut BfnReportHandle) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfn_report_iterations(report: *const BfnReportHandle, out: *mut usize) -> BfnStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.inner.iterations.len();
        Ok(())
    })
}

/// Norms `||w(0)||`, `||w(T)||`, `||w~(0)||` of iteration `index` (0-based).
///
/// # Safety
/// `report` must be a live handle; the outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bfn_report_norms(
    report: *const BfnReportHandle,
    index: usize,
    w0: *mut f64,
    wt: *mut f64,
    wtilde0: *mut f64,
) -> BfnStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let it = r.inner.iterations.get(index).ok_or_else(|| {
            (
                BfnStatus::InvalidArgument,
                format!("iteration {index} out of range (have {})", r.inner.iterations.len()),
            )
        })?;
        *w0.as_mut().ok_or_else(|| null("w0"))? = it.w0_norm;
        *wt.as_mut().ok_or_else(|| null("wt"))? = it.wt_norm;
        *wtilde0.as_mut().ok_or_else(|| null("wtilde0"))? = it.wtilde0_norm;
        Ok(())
    })
}

/// Number of grid nodes in the decrease-rate profile.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfn_report_profile_len(report: *const BfnReportHandle, out: *mut usize) -> BfnStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.inner.profile.x.len();
        Ok(())
    })
}

/// Copies nodes and decrease rates; excluded nodes get NaN.
///
/// # Safety
/// `x` and `rate` must point to `len` writable doubles, `len` equal to
/// [`bfn_report_profile_len`].
#[no_mangle]
pub unsafe extern "C" fn bfn_report_profile(
    report: *const BfnReportHandle,
    x: *mut f64,
    rate: *mut f64,
    len: usize,
) -> BfnStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let p = &r.inner.profile;
        if len != p.x.len() {
            return Err((
                BfnStatus::InvalidArgument,
                format!("buffer length {len} differs from profile length {}", p.x.len()),
            ));
        }
        if x.is_null() || rate.is_null() {
            return Err(null("output buffer"));
        }
        let xs = std::slice::from_raw_parts_mut(x, len);
        let rs = std::slice::from_raw_parts_mut(rate, len);
        xs.copy_from_slice(&p.x);
        for (dst, src) in rs.iter_mut().zip(&p.rate) {
            *dst = src.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Deviation from a closed form; `NoOracle` when the run has none.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfn_report_oracle(
    report: *const BfnReportHandle,
    case: BfnOracle,
    out: *mut f64,
) -> BfnStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        let case = match case {
            BfnOracle::Theorem1 => OracleCase::Theorem1,
            BfnOracle::Theorem4 => OracleCase::Theorem4,
            BfnOracle::Theorem6 => OracleCase::Theorem6,
            BfnOracle::Proposition7 => OracleCase::Proposition7,
        };
        *out.as_mut().ok_or_else(|| null("out"))? = oracle_deviation(&r.inner, case).map_err(core_err)?;
        Ok(())
    })
}

/// The report as JSON (without the profile). Free with [`bfn_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfn_report_to_json(report: *const BfnReportHandle, out: *mut *mut c_char) -> BfnStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = report_json(&r.inner).map_err(core_err)?;
        *out = CString::new(json)
            .map_err(|_| (BfnStatus::Io, "JSON contains a NUL byte".to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bfn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `max_n ln|b_n| / n^2` for `a_n = n^-2`, `n <= N`; writes NaN when every
/// coefficient vanishes.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfn_bn_max_growth(k: f64, kp: f64, nu: f64, t: f64, n: usize, out: *mut f64) -> BfnStatus {
    guard(|| {
        if n == 0 || n > BN_MAX_N {
            return Err((BfnStatus::InvalidArgument, format!("N must lie in 1..={BN_MAX_N}, got {n}")));
        }
        let seq = bn_sequence(&inverse_square_coefficients(n), k, kp, nu, t).map_err(core_err)?;
        *out.as_mut().ok_or_else(|| null("out"))? = seq.max_growth().unwrap_or(f64::NAN);
        Ok(())
    })
}
