//! C ABI over the core library. Handles are opaque pointers owned by the
//! caller and released with the matching `_free` function; strings
//! returned through out-parameters are released with [`qpf_string_free`].
//! Every fallible call returns a [`QpfStatus`]; on failure,
//! [`qpf_last_error`] describes the most recent error on the calling
//! thread. No call unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qpfourier::cli::{generate_seeded, parse_spec};
use qpfourier::haar::HaarMeasure;
use qpfourier::step::StepFunction;
use qpfourier::{approximate, approximate_at_level, fourier_truncate, membership_check, Prime};

/// Result of a C API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpfStatus {
    /// The call succeeded and out-parameters are set.
    Ok = 0,
    /// A pointer was null or a string was not valid UTF-8.
    InvalidArgument = 1,
    /// The library rejected the operation; see qpf_last_error().
    Error = 2,
    /// An internal invariant failed; see qpf_last_error().
    Panic = 3,
}

/// Opaque handle to a step function.
pub struct QpfStepFunction(StepFunction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let stored = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn guarded(body: impl FnOnce() -> QpfStatus) -> QpfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("internal panic: {message}"));
            QpfStatus::Panic
        }
    }
}

/// Reads a caller string; the caller guarantees the pointer, if non-null,
/// is a NUL-terminated string valid for the duration of the call.
unsafe fn text_in<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, QpfStatus> {
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(QpfStatus::InvalidArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        QpfStatus::InvalidArgument
    })
}

unsafe fn handle_in<'a>(
    ptr: *const QpfStepFunction,
    what: &str,
) -> Result<&'a StepFunction, QpfStatus> {
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        return Err(QpfStatus::InvalidArgument);
    }
    Ok(&(*ptr).0)
}

fn require_out<T>(ptr: *mut T, what: &str) -> Result<(), QpfStatus> {
    if ptr.is_null() {
        set_error(format!("{what} is null"));
        Err(QpfStatus::InvalidArgument)
    } else {
        Ok(())
    }
}

fn emit_function(out: *mut *mut QpfStepFunction, f: StepFunction) {
    unsafe { *out = Box::into_raw(Box::new(QpfStepFunction(f))) };
}

fn emit_string(out: *mut *mut c_char, text: String) {
    let stored =
        CString::new(text).unwrap_or_else(|_| CString::new("output contained NUL").unwrap());
    unsafe { *out = stored.into_raw() };
}

fn lib_error(e: qpfourier::Error) -> QpfStatus {
    set_error(e.to_string());
    QpfStatus::Error
}

/// Version of the underlying library, as a static string; do not free.
#[no_mangle]
pub extern "C" fn qpf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Description of the last error on this thread, or null if the last
/// call succeeded. Valid until the next API call on the same thread; do
/// not free.
#[no_mangle]
pub extern "C" fn qpf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Releases a string returned by this library. Null is a no-op.
///
/// # Safety
/// `ptr` must be null or a string obtained from this library that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn qpf_string_free(ptr: *mut c_char) {
    if !ptr.is_null() {
        drop(CString::from_raw(ptr));
    }
}

/// Releases a step-function handle. Null is a no-op.
///
/// # Safety
/// `f` must be null or a handle obtained from this library that has not
/// been freed already.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_free(f: *mut QpfStepFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Parses the JSON form of a step function into a new handle.
///
/// # Safety
/// `json` must be null or a NUL-terminated string valid for the call;
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_from_json(
    json: *const c_char,
    out: *mut *mut QpfStepFunction,
) -> QpfStatus {
    guarded(|| {
        let text = match text_in(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        match StepFunction::from_json(text) {
            Ok(f) => {
                emit_function(out, f);
                QpfStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// Builds a function from the spec mini-language, e.g.
/// "indicator:center=1/2,level=-1" or "random:level=3,window=1,seed=7".
/// `seed` feeds random specs that carry none.
///
/// # Safety
/// `spec` must be null or a NUL-terminated string valid for the call;
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_generate(
    spec: *const c_char,
    prime: u32,
    seed: u64,
    out: *mut *mut QpfStepFunction,
) -> QpfStatus {
    guarded(|| {
        let text = match text_in(spec, "spec") {
            Ok(t) => t,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        let built = Prime::new(prime)
            .and_then(|p| parse_spec(text).and_then(|s| generate_seeded(&s, p, seed)));
        match built {
            Ok(f) => {
                emit_function(out, f);
                QpfStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// Serializes a step function to its JSON form.
///
/// # Safety
/// `f` must be null or a live handle from this library; `out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_to_json(
    f: *const QpfStepFunction,
    out: *mut *mut c_char,
) -> QpfStatus {
    guarded(|| {
        let f = match handle_in(f, "function") {
            Ok(f) => f,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        emit_string(out, f.to_json());
        QpfStatus::Ok
    })
}

/// Copies a handle.
///
/// # Safety
/// `f` must be null or a live handle from this library; `out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_clone(
    f: *const QpfStepFunction,
    out: *mut *mut QpfStepFunction,
) -> QpfStatus {
    guarded(|| {
        let f = match handle_in(f, "function") {
            Ok(f) => f,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        emit_function(out, f.clone());
        QpfStatus::Ok
    })
}

/// The prime of the ambient field, or 0 if the handle is null.
///
/// # Safety
/// `f` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_prime(f: *const QpfStepFunction) -> u32 {
    if f.is_null() {
        0
    } else {
        (*f).0.prime().value()
    }
}

/// The representation level, or 0 if the handle is null.
///
/// # Safety
/// `f` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_level(f: *const QpfStepFunction) -> i32 {
    if f.is_null() {
        0
    } else {
        (*f).0.level()
    }
}

/// Number of stored pieces, or 0 if the handle is null.
///
/// # Safety
/// `f` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_piece_count(f: *const QpfStepFunction) -> usize {
    if f.is_null() {
        0
    } else {
        (*f).0.piece_count()
    }
}

/// L2 norm under the normalized measure.
///
/// # Safety
/// `f` must be null or a live handle from this library; `out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_step_l2_norm(f: *const QpfStepFunction, out: *mut f64) -> QpfStatus {
    guarded(|| {
        let f = match handle_in(f, "function") {
            Ok(f) => f,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        match HaarMeasure::normalized(f.prime()).l2_norm(f) {
            Ok(v) => {
                *out = v;
                QpfStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// L2 distance between two functions over the same prime.
///
/// # Safety
/// `f` and `g` must each be null or a live handle from this library;
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_l2_distance(
    f: *const QpfStepFunction,
    g: *const QpfStepFunction,
    out: *mut f64,
) -> QpfStatus {
    guarded(|| {
        let f = match handle_in(f, "first function") {
            Ok(f) => f,
            Err(s) => return s,
        };
        let g = match handle_in(g, "second function") {
            Ok(g) => g,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        match HaarMeasure::normalized(f.prime()).l2_distance(f, g) {
            Ok(v) => {
                *out = v;
                QpfStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// Orthogonal projection onto characters of level <= k; the input must be
/// supported inside the unit ball.
///
/// # Safety
/// `f` must be null or a live handle from this library; `out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_fourier_truncate(
    f: *const QpfStepFunction,
    k: i32,
    out: *mut *mut QpfStepFunction,
) -> QpfStatus {
    guarded(|| {
        let f = match handle_in(f, "function") {
            Ok(f) => f,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        match fourier_truncate(f, k) {
            Ok(t) => {
                emit_function(out, t);
                QpfStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// Glued approximation meeting the target N: per-coset error below 1/N,
/// total below t/N. `out_report_json` may be null; otherwise it receives
/// the run report as JSON.
///
/// # Safety
/// `f` must be null or a live handle from this library; `out` and
/// `out_report_json` must each be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_approximate(
    f: *const QpfStepFunction,
    n_target: u64,
    out: *mut *mut QpfStepFunction,
    out_report_json: *mut *mut c_char,
) -> QpfStatus {
    guarded(|| {
        let f = match handle_in(f, "function") {
            Ok(f) => f,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        match approximate(f, n_target) {
            Ok((phi, report)) => {
                emit_function(out, phi);
                if !out_report_json.is_null() {
                    emit_string(out_report_json, report.to_json());
                }
                QpfStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// Glued approximation at one fixed truncation level for every coset.
/// `out_report_json` may be null; otherwise it receives the run report
/// as JSON.
///
/// # Safety
/// `f` must be null or a live handle from this library; `out` and
/// `out_report_json` must each be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_approximate_at_level(
    f: *const QpfStepFunction,
    k: i32,
    out: *mut *mut QpfStepFunction,
    out_report_json: *mut *mut c_char,
) -> QpfStatus {
    guarded(|| {
        let f = match handle_in(f, "function") {
            Ok(f) => f,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        match approximate_at_level(f, k) {
            Ok((phi, report)) => {
                emit_function(out, phi);
                if !out_report_json.is_null() {
                    emit_string(out_report_json, report.to_json());
                }
                QpfStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}

/// Whether the function lies in the span of shifted lifted character
/// sums (reconstruction identity within 1e-9 per coset).
///
/// # Safety
/// `f` must be null or a live handle from this library; `out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn qpf_membership_check(
    f: *const QpfStepFunction,
    out: *mut bool,
) -> QpfStatus {
    guarded(|| {
        let f = match handle_in(f, "function") {
            Ok(f) => f,
            Err(s) => return s,
        };
        if let Err(s) = require_out(out, "out") {
            return s;
        }
        match membership_check(f) {
            Ok(v) => {
                *out = v;
                QpfStatus::Ok
            }
            Err(e) => lib_error(e),
        }
    })
}
