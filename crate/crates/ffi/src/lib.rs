//! C ABI over `cartan-mgs`.
//!
//! Every function returns a [`CmgsStatus`]; on failure the message is kept in
//! a thread-local slot readable with [`cmgs_last_error_message`]. Handles are
//! opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cartan_mgs::cli::{encode_cache, CommandKind, FieldInfo, Report, RunConfig, Timing};
use cartan_mgs::mgs::Params;
use cartan_mgs::verify::{run_suite, MaxOptions, Suite, SuiteOptions};
use cartan_mgs::{build, CartanAlgebra, Error, Family};

/// Opaque handle to a constructed algebra.
pub struct CmgsAlgebra(CartanAlgebra);

/// Opaque handle to a verification report.
pub struct CmgsReport(Report);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmgsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Format = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A field element `c0 + c1 s`; `c1` is 0 over a prime field.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CmgsScalar {
    pub c0: u32,
    pub c1: u32,
}

pub const CMGS_SUITE_IDENTITIES: u32 = 1;
pub const CMGS_SUITE_TYPE1: u32 = 2;
pub const CMGS_SUITE_TYPE2: u32 = 4;
pub const CMGS_SUITE_TYPE3R: u32 = 8;
pub const CMGS_SUITE_TYPE3S: u32 = 16;
pub const CMGS_SUITE_ALL: u32 = 31;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(msg).expect("NUL bytes removed")));
}

fn fail(status: CmgsStatus, msg: impl Into<String>) -> CmgsStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> CmgsStatus {
    let status = match e {
        Error::Parameter(_) => CmgsStatus::InvalidParameter,
        Error::Format(_) => CmgsStatus::Format,
        Error::Io(_) => CmgsStatus::Io,
        _ => CmgsStatus::Domain,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> CmgsStatus) -> CmgsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(CmgsStatus::Panic, msg)
        }
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(r) => r,
            None => return fail(CmgsStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

macro_rules! out {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(r) => r,
            None => return fail(CmgsStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

/// Copies `bytes` plus a NUL into `buf`. `out_len` receives the length
/// without the NUL, also when the buffer is too small.
unsafe fn copy_c_string(bytes: &[u8], buf: *mut c_char, cap: usize, out_len: *mut usize) -> CmgsStatus {
    if let Some(l) = unsafe { out_len.as_mut() } {
        *l = bytes.len();
    }
    if buf.is_null() || cap < bytes.len() + 1 {
        return fail(CmgsStatus::BufferTooSmall, format!("need {} bytes", bytes.len() + 1));
    }
    unsafe {
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), bytes.len());
        *buf.add(bytes.len()) = 0;
    }
    CmgsStatus::Ok
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cmgs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Length in bytes of the last error message of this thread, 0 if none.
#[no_mangle]
pub extern "C" fn cmgs_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |s| s.as_bytes().len()))
}

/// Copies the last error message of this thread into `buf`.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes; `out_len` must be
/// null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_last_error_message(buf: *mut c_char, cap: usize, out_len: *mut usize) -> CmgsStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().as_ref().map(|s| s.as_bytes().to_vec()).unwrap_or_default());
    unsafe { copy_c_string(&msg, buf, cap, out_len) }
}

/// Builds `family(m, n)` in characteristic `p`. `family` is one of the
/// characters `W`, `S`, `H`, `K`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_algebra_new(family: c_char, p: u32, m: usize, n: usize, out: *mut *mut CmgsAlgebra) -> CmgsStatus {
    guard(|| {
        let out = out!(out);
        *out = ptr::null_mut();
        let fam: Family = match (family as u8 as char).to_string().parse() {
            Ok(f) => f,
            Err(e) => return from_error(e),
        };
        match build(fam, p, m, n) {
            Ok(alg) => {
                *out = Box::into_raw(Box::new(CmgsAlgebra(alg)));
                CmgsStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `alg` must be null or a handle from [`cmgs_algebra_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cmgs_algebra_free(alg: *mut CmgsAlgebra) {
    if !alg.is_null() {
        drop(unsafe { Box::from_raw(alg) });
    }
}

/// # Safety
/// `alg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_algebra_dim(alg: *const CmgsAlgebra, out: *mut usize) -> CmgsStatus {
    let alg = deref!(alg);
    *out!(out) = alg.0.dim();
    CmgsStatus::Ok
}

/// Lowest and highest degree with a nonzero component.
///
/// # Safety
/// `alg` must be a live handle and both outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_algebra_degree_range(alg: *const CmgsAlgebra, out_min: *mut i32, out_max: *mut i32) -> CmgsStatus {
    let alg = deref!(alg);
    let lo = out!(out_min);
    let hi = out!(out_max);
    *lo = alg.0.min_degree();
    *hi = alg.0.max_degree();
    CmgsStatus::Ok
}

/// Dimension of the degree `degree` component; 0 outside the range.
///
/// # Safety
/// `alg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_algebra_component_dim(alg: *const CmgsAlgebra, degree: i32, out: *mut usize) -> CmgsStatus {
    let alg = deref!(alg);
    *out!(out) = alg.0.comp_dim(degree);
    CmgsStatus::Ok
}

/// 1 for GF(p), 2 for GF(p^2).
///
/// # Safety
/// `alg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_algebra_field_degree(alg: *const CmgsAlgebra, out: *mut u32) -> CmgsStatus {
    let alg = deref!(alg);
    *out!(out) = alg.0.field().degree();
    CmgsStatus::Ok
}

/// Writes `[e_i, e_j]` as `out_len` pairs of basis index and coefficient.
/// With `cap` too small, `out_len` receives the needed length and nothing
/// else is written.
///
/// # Safety
/// `alg` must be a live handle; `out_index` and `out_coeff` must point to
/// `cap` writable entries (or be null when `cap` is 0); `out_len` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_algebra_bracket(
    alg: *const CmgsAlgebra,
    i: usize,
    j: usize,
    out_index: *mut u32,
    out_coeff: *mut CmgsScalar,
    cap: usize,
    out_len: *mut usize,
) -> CmgsStatus {
    guard(|| {
        let alg = deref!(alg);
        let len = out!(out_len);
        let dim = alg.0.dim();
        if i >= dim || j >= dim {
            return fail(CmgsStatus::InvalidParameter, format!("basis index out of range 0..{dim}"));
        }
        let terms = alg.0.bracket_basis(i, j);
        *len = terms.len();
        if terms.len() > cap {
            return fail(CmgsStatus::BufferTooSmall, format!("need {} entries", terms.len()));
        }
        if !terms.is_empty() && (out_index.is_null() || out_coeff.is_null()) {
            return fail(CmgsStatus::NullPointer, "output arrays are null");
        }
        for (t, (k, c)) in terms.into_iter().enumerate() {
            unsafe {
                *out_index.add(t) = k as u32;
                *out_coeff.add(t) = CmgsScalar { c0: c.c0, c1: c.c1 };
            }
        }
        CmgsStatus::Ok
    })
}

/// Writes the structure-constant cache to `path`.
///
/// # Safety
/// `alg` must be a live handle and `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn cmgs_algebra_write_cache(alg: *const CmgsAlgebra, path: *const c_char) -> CmgsStatus {
    guard(|| {
        let alg = deref!(alg);
        if path.is_null() {
            return fail(CmgsStatus::NullPointer, "path is null");
        }
        let path = match unsafe { CStr::from_ptr(path) }.to_str() {
            Ok(s) => Path::new(s),
            Err(e) => return fail(CmgsStatus::InvalidParameter, e.to_string()),
        };
        match std::fs::write(path, encode_cache(&alg.0)) {
            Ok(()) => CmgsStatus::Ok,
            Err(e) => from_error(e.into()),
        }
    })
}

/// Runs the suites selected by the `CMGS_SUITE_*` bits with sampled
/// maximality at `samples` vectors per component.
///
/// # Safety
/// `alg` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_verify(
    alg: *const CmgsAlgebra,
    suites: u32,
    samples: usize,
    seed: u64,
    out: *mut *mut CmgsReport,
) -> CmgsStatus {
    guard(|| {
        let alg = deref!(alg);
        let out = out!(out);
        *out = ptr::null_mut();
        if suites & !CMGS_SUITE_ALL != 0 {
            return fail(CmgsStatus::InvalidParameter, format!("unknown suite bits {suites:#x}"));
        }
        let opts = SuiteOptions {
            suites: Suite::ALL.into_iter().enumerate().filter(|(k, _)| suites >> k & 1 == 1).map(|(_, s)| s).collect(),
            max: MaxOptions { samples, seed, ..MaxOptions::default() },
            ..SuiteOptions::default()
        };
        let alg = &alg.0;
        let pr = Params::of(alg);
        let start = std::time::Instant::now();
        let mut config = RunConfig::point(CommandKind::Verify, pr.family, pr.p, pr.m, pr.n);
        config.suite = opts.clone();
        let mut report = Report::new(config);
        report.fields.push(FieldInfo::of(pr, alg.field()));
        report.findings = run_suite(alg, &opts);
        let ms = start.elapsed().as_millis() as u64;
        report.timing = Timing { total_ms: ms, points: vec![(pr, ms)] };
        report.finish();
        *out = Box::into_raw(Box::new(CmgsReport(report)));
        CmgsStatus::Ok
    })
}

/// # Safety
/// `report` must be null or a handle from [`cmgs_verify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cmgs_report_free(report: *mut CmgsReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_report_finding_count(report: *const CmgsReport, out: *mut usize) -> CmgsStatus {
    let r = deref!(report);
    *out!(out) = r.0.findings.len();
    CmgsStatus::Ok
}

/// Findings that fail and are not documented discrepancies.
///
/// # Safety
/// `report` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_report_unexpected_failures(report: *const CmgsReport, out: *mut usize) -> CmgsStatus {
    let r = deref!(report);
    *out!(out) = r.0.findings.iter().filter(|f| f.is_unexpected_failure()).count();
    CmgsStatus::Ok
}

/// Copies the JSON report into `buf`; see [`cmgs_last_error_message`] for
/// the buffer protocol.
///
/// # Safety
/// `report` must be a live handle; `buf` null or `cap` writable bytes;
/// `out_len` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn cmgs_report_json(report: *const CmgsReport, buf: *mut c_char, cap: usize, out_len: *mut usize) -> CmgsStatus {
    let r = deref!(report);
    unsafe { copy_c_string(r.0.to_json().as_bytes(), buf, cap, out_len) }
}
