//! C ABI for the lcsg verification engine.
//!
//! Definitions and reports are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every function returns an
//! [`LcsgStatus`]; on failure [`lcsg_last_error`] describes the error for
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lcsg::dsl::{load, run_suite, Definitions, RunOptions};
use lcsg::report::{CheckReport, Settings, Verdict, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOL};
use lcsg::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcsgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Definition = 4,
    UnknownSuite = 5,
    Io = 6,
    Numeric = 7,
    OutOfRange = 8,
    Panic = 9,
}

impl From<&Error> for LcsgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Syntax { .. } | Error::UnknownVariable { .. } => LcsgStatus::Syntax,
            Error::UnknownSuite(_) => LcsgStatus::UnknownSuite,
            Error::Io(_) => LcsgStatus::Io,
            Error::Definition(_)
            | Error::InvalidChart(_)
            | Error::ChartMismatch { .. }
            | Error::KindMismatch(_)
            | Error::DegreeOverflow { .. }
            | Error::DegreeUnderflow { .. } => LcsgStatus::Definition,
            _ => LcsgStatus::Numeric,
        }
    }
}

/// Parsed definition file.
pub struct LcsgDefinitions(Definitions);

/// Result of a suite run. Entry strings live as long as the report.
pub struct LcsgReport {
    report: CheckReport,
    strings: Vec<(CString, CString)>,
}

/// Sampling and control options for [`lcsg_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LcsgOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Nonzero stops after the first failing check group.
    pub fail_fast: i32,
    /// Nonzero records wall time in the report.
    pub timing: i32,
}

/// One report entry. `id` and `paper_tag` are borrowed from the report.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LcsgEntry {
    pub id: *const c_char,
    pub paper_tag: *const c_char,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    /// 1 for pass, 0 for fail.
    pub passed: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: LcsgStatus, msg: &str) -> LcsgStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> LcsgStatus) -> LcsgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(LcsgStatus::Panic, &msg)
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, LcsgStatus> {
    if s.is_null() {
        return Err(fail(LcsgStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(LcsgStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn store_defs(r: lcsg::Result<Definitions>, out: *mut *mut LcsgDefinitions) -> LcsgStatus {
    match r {
        Ok(d) => {
            unsafe { *out = Box::into_raw(Box::new(LcsgDefinitions(d))) };
            LcsgStatus::Ok
        }
        Err(e) => fail((&e).into(), &e.to_string()),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lcsg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn lcsg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default options: 64 samples, seed 0xD1CE, tolerance 1e-8.
#[no_mangle]
pub extern "C" fn lcsg_default_options() -> LcsgOptions {
    LcsgOptions { samples: DEFAULT_SAMPLES, seed: DEFAULT_SEED, tolerance: DEFAULT_TOL, fail_fast: 0, timing: 0 }
}

/// Parses definition text.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lcsg_definitions_parse(text: *const c_char, out: *mut *mut LcsgDefinitions) -> LcsgStatus {
    guard(|| {
        if out.is_null() {
            return fail(LcsgStatus::NullPointer, "null output pointer");
        }
        match read_str(text) {
            Ok(t) => store_defs(load(t), out),
            Err(s) => s,
        }
    })
}

/// Reads and parses a definition file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lcsg_definitions_load_file(path: *const c_char, out: *mut *mut LcsgDefinitions) -> LcsgStatus {
    guard(|| {
        if out.is_null() {
            return fail(LcsgStatus::NullPointer, "null output pointer");
        }
        match read_str(path) {
            Ok(p) => store_defs(lcsg::dsl::load_file(std::path::Path::new(p)), out),
            Err(s) => s,
        }
    })
}

/// Loads a shipped catalog item by id or file name.
///
/// # Safety
/// `id` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lcsg_definitions_load_catalog(id: *const c_char, out: *mut *mut LcsgDefinitions) -> LcsgStatus {
    guard(|| {
        if out.is_null() {
            return fail(LcsgStatus::NullPointer, "null output pointer");
        }
        match read_str(id) {
            Ok(i) => store_defs(lcsg::catalog::find(i).and_then(|c| c.load()), out),
            Err(s) => s,
        }
    })
}

/// Number of structures declared in the definitions, or 0 for null.
///
/// # Safety
/// `defs` must be null or a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn lcsg_definitions_structure_count(defs: *const LcsgDefinitions) -> usize {
    defs.as_ref().map_or(0, |d| d.0.structures.len())
}

/// Releases a definitions handle. Null is ignored.
///
/// # Safety
/// `defs` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lcsg_definitions_free(defs: *mut LcsgDefinitions) {
    if !defs.is_null() {
        drop(Box::from_raw(defs));
    }
}

/// Runs a suite. The report is produced whether or not its checks pass.
///
/// # Safety
/// `defs` must be a live handle, `suite` a valid NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lcsg_run(
    defs: *const LcsgDefinitions,
    suite: *const c_char,
    options: LcsgOptions,
    out: *mut *mut LcsgReport,
) -> LcsgStatus {
    guard(|| {
        let Some(d) = defs.as_ref() else {
            return fail(LcsgStatus::NullPointer, "null definitions handle");
        };
        if out.is_null() {
            return fail(LcsgStatus::NullPointer, "null output pointer");
        }
        let suite = match read_str(suite) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let opts = RunOptions {
            settings: Settings::new(options.samples, options.seed, options.tolerance),
            fail_fast: options.fail_fast != 0,
            timing: options.timing != 0,
        };
        match run_suite(&d.0, suite, &opts) {
            Ok(report) => {
                let strings = report
                    .entries
                    .iter()
                    .map(|e| {
                        (
                            CString::new(e.id.replace('\0', " ")).unwrap_or_default(),
                            CString::new(e.paper_tag.replace('\0', " ")).unwrap_or_default(),
                        )
                    })
                    .collect();
                *out = Box::into_raw(Box::new(LcsgReport { report, strings }));
                LcsgStatus::Ok
            }
            Err(e) => fail((&e).into(), &e.to_string()),
        }
    })
}

/// 1 if every entry passes, 0 otherwise (including null).
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcsg_report_passed(report: *const LcsgReport) -> i32 {
    report.as_ref().map_or(0, |r| r.report.passed() as i32)
}

/// Number of entries, or 0 for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcsg_report_entry_count(report: *const LcsgReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.entries.len())
}

/// Copies entry `index` into `out`.
///
/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lcsg_report_entry(report: *const LcsgReport, index: usize, out: *mut LcsgEntry) -> LcsgStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return fail(LcsgStatus::NullPointer, "null report handle");
        };
        if out.is_null() {
            return fail(LcsgStatus::NullPointer, "null output pointer");
        }
        let (Some(e), Some((id, tag))) = (r.report.entries.get(index), r.strings.get(index)) else {
            return fail(LcsgStatus::OutOfRange, &format!("entry index {index} out of range"));
        };
        *out = LcsgEntry {
            id: id.as_ptr(),
            paper_tag: tag.as_ptr(),
            max_residual: e.max_residual,
            tolerance: e.tolerance,
            samples: e.samples,
            passed: (e.verdict == Verdict::Pass) as i32,
        };
        LcsgStatus::Ok
    })
}

/// The report as JSON; release with [`lcsg_string_free`]. Null on error.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcsg_report_to_json(report: *const LcsgReport) -> *mut c_char {
    let Some(r) = report.as_ref() else {
        set_error("null report handle");
        return ptr::null_mut();
    };
    match catch_unwind(AssertUnwindSafe(|| CString::new(r.report.to_json()))) {
        Ok(Ok(s)) => s.into_raw(),
        _ => {
            set_error("report serialization failed");
            ptr::null_mut()
        }
    }
}

/// Releases a report handle. Null is ignored.
///
/// # Safety
/// `report` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lcsg_report_free(report: *mut LcsgReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lcsg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
