//! C ABI for the workbench: parse a JSON scenario config, run one pipeline,
//! and hand back the JSON report through an opaque handle.
//!
//! Conventions:
//! - every function is null-safe and returns a `TkxStatus` or a pointer that
//!   is null on failure;
//! - strings crossing the boundary are NUL-terminated UTF-8 owned by the
//!   handle (valid until `tkx_report_free`) or by a thread-local error slot
//!   (valid until the next failing call on the same thread);
//! - handles must be released exactly once with `tkx_report_free`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::ptr;

use tkindex::scenario::{run, ScenarioConfig};
use tkindex::Error;

/// Status codes mirror the CLI exit codes: 0 success, 1 computation failure,
/// 2 validation failure; 3 is reserved for misuse of the ABI itself.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum TkxStatus {
    Ok = 0,
    Computation = 1,
    Validation = 2,
    InvalidArgument = 3,
}

/// Opaque result handle: owns the report JSON and the aggregate verdict.
pub struct TkxReport {
    json: CString,
    all_pass: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn utf8_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, TkxStatus> {
    if p.is_null() {
        set_error(&format!("{what} is null"));
        return Err(TkxStatus::InvalidArgument);
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        TkxStatus::InvalidArgument
    })
}

/// Run one pipeline (same names as the CLI subcommands: "cech-h", "dd-class",
/// "twisted-derham", "family-index", "index-compare", "scl-check",
/// "thom-check", "grr") on a JSON scenario config.  On success writes a new
/// handle to `out`; on failure leaves `out` untouched and records a message
/// retrievable via `tkx_last_error`.
///
/// # Safety
/// `subcommand` and `config_json` must be NUL-terminated strings or null;
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn tkx_run(
    subcommand: *const c_char,
    config_json: *const c_char,
    out: *mut *mut TkxReport,
) -> TkxStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return TkxStatus::InvalidArgument;
    }
    let sub = match utf8_arg(subcommand, "subcommand") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let cfg_text = match utf8_arg(config_json, "config_json") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let result = std::panic::catch_unwind(|| -> Result<TkxReport, Error> {
        let cfg = ScenarioConfig::from_json(cfg_text)?;
        let report = run(sub, &cfg)?;
        Ok(TkxReport {
            all_pass: report.all_pass(),
            json: CString::new(report.to_json().replace('\0', " "))
                .map_err(|e| Error::computation(e.to_string()))?,
        })
    });
    match result {
        Ok(Ok(rep)) => {
            *out = Box::into_raw(Box::new(rep));
            TkxStatus::Ok
        }
        Ok(Err(Error::Validation(m))) => {
            set_error(&m);
            TkxStatus::Validation
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            TkxStatus::Computation
        }
        Err(_) => {
            set_error("internal panic during pipeline execution");
            TkxStatus::Computation
        }
    }
}

/// Borrow the report JSON (NUL-terminated UTF-8).  Returns null if the
/// handle is null.  The pointer is owned by the handle.
///
/// # Safety
/// `report` must be a handle produced by `tkx_run` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn tkx_report_json(report: *const TkxReport) -> *const c_char {
    match report.as_ref() {
        Some(r) => r.json.as_ptr(),
        None => ptr::null(),
    }
}

/// 1 if every pass criterion in the report holds, 0 otherwise (or if the
/// handle is null).
///
/// # Safety
/// `report` must be a handle produced by `tkx_run` that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn tkx_report_all_pass(report: *const TkxReport) -> c_int {
    match report.as_ref() {
        Some(r) if r.all_pass => 1,
        _ => 0,
    }
}

/// Release a handle.  Null is accepted and ignored.
///
/// # Safety
/// `report` must be null or a handle produced by `tkx_run`, freed at most
/// once.
#[no_mangle]
pub unsafe extern "C" fn tkx_report_free(report: *mut TkxReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Message for the most recent failure on this thread (NUL-terminated,
/// valid until the next failing call on the same thread).
#[no_mangle]
pub extern "C" fn tkx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tkx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn run_ok(sub: &str, cfg: &str) -> (TkxStatus, *mut TkxReport) {
        let sub = CString::new(sub).unwrap();
        let cfg = CString::new(cfg).unwrap();
        let mut out: *mut TkxReport = ptr::null_mut();
        let st = unsafe { tkx_run(sub.as_ptr(), cfg.as_ptr(), &mut out) };
        (st, out)
    }

    #[test]
    fn grr_roundtrip_through_abi() {
        let (st, rep) = run_ok("grr", r#"{"name":"ffi","base":"circle"}"#);
        assert!(st == TkxStatus::Ok);
        assert_eq!(unsafe { tkx_report_all_pass(rep) }, 1);
        let json = unsafe { CStr::from_ptr(tkx_report_json(rep)) }
            .to_str()
            .unwrap();
        assert!(json.contains("\"13/12\""));
        unsafe { tkx_report_free(rep) };
    }

    #[test]
    fn validation_errors_surface_with_message() {
        let (st, rep) = run_ok("grr", r#"{"name":"ffi","base":"circle","bogus":1}"#);
        assert!(st == TkxStatus::Validation);
        assert!(rep.is_null());
        let msg = unsafe { CStr::from_ptr(tkx_last_error()) }.to_str().unwrap();
        assert!(!msg.is_empty());
    }

    #[test]
    fn null_arguments_are_rejected() {
        let mut out: *mut TkxReport = ptr::null_mut();
        let st = unsafe { tkx_run(ptr::null(), ptr::null(), &mut out) };
        assert!(st == TkxStatus::InvalidArgument);
        assert!(unsafe { tkx_report_json(ptr::null()) }.is_null());
        unsafe { tkx_report_free(ptr::null_mut()) };
    }
}
