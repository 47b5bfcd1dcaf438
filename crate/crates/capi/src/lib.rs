//! C ABI for the learning pipeline.
//!
//! All functions are `extern "C"` and panic-safe. Objects cross the
//! boundary as opaque handles (`CfBundle`, `CfResult`) that must be
//! released with the matching `_free` function. Strings returned to the
//! caller are NUL-terminated, UTF-8, and owned by the caller until passed
//! to `cf_string_free`. Every fallible call returns a `CfStatus`; on
//! failure `cf_last_error` yields a message for the current thread.

use causalfuse::data::{load_manifest, DatasetBundle};
use causalfuse::fusion::{learn_pag, HyperParams, LearnOutput};
use causalfuse::score::BdeuParams;
use causalfuse::graph::render_graph;
use causalfuse::Error;
use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

/// Result code of a C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    /// The call succeeded.
    CfOk = 0,
    /// A pointer argument was null or an option value was out of range.
    CfInvalidArgument = 1,
    /// The input data failed validation (bad manifest, CSV, or targets).
    CfValidation = 2,
    /// An unexpected internal failure; see `cf_last_error`.
    CfInternal = 4,
}

/// Tuning options for `cf_learn`. Initialize with `cf_options_default`
/// before overriding individual fields.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CfOptions {
    /// Significance threshold for the conditional-independence tests.
    pub significance: f64,
    /// Posterior cut-off above which an edge direction is accepted.
    pub cutoff: f64,
    /// Maximum separating-set size during skeleton search.
    pub max_sepset: u32,
    /// Equivalent sample size of the BDeu score.
    pub ess: f64,
    /// Bit mask of active prior factors: bit 0 = occurrence rates,
    /// bit 1 = separating-set ratios, bit 2 = interventional score changes.
    pub factors: u32,
}

/// An in-memory observational + interventional dataset collection.
pub struct CfBundle {
    inner: DatasetBundle,
}

/// The output of a learning run: the PAG and per-edge probabilities.
pub struct CfResult {
    inner: LearnOutput,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&ch| ch != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> CfStatus {
    match err {
        Error::Validation(_) | Error::Parse(_) | Error::Domain(_) | Error::Csv(_)
        | Error::Json(_) | Error::Io(_) => CfStatus::CfValidation,
        _ => CfStatus::CfInternal,
    }
}

fn guarded(f: impl FnOnce() -> CfStatus) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            CfStatus::CfInternal
        }
    }
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn cf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string; never free it.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Fill `out` with the default learning options.
///
/// # Safety
/// `out` must be a valid pointer or null.
#[no_mangle]
pub unsafe extern "C" fn cf_options_default(out: *mut CfOptions) -> CfStatus {
    if out.is_null() {
        set_error("out is null");
        return CfStatus::CfInvalidArgument;
    }
    let h = HyperParams::default();
    unsafe {
        *out = CfOptions {
            significance: h.t,
            cutoff: h.c,
            max_sepset: h.k as u32,
            ess: h.params.alpha,
            factors: 0b111,
        };
    }
    CfStatus::CfOk
}

fn hyper_from(opts: &CfOptions) -> Result<HyperParams, String> {
    if !(opts.significance > 0.0 && opts.significance < 1.0) {
        return Err(format!("significance {} outside (0, 1)", opts.significance));
    }
    if !(0.0..=1.0).contains(&opts.cutoff) {
        return Err(format!("cutoff {} outside [0, 1]", opts.cutoff));
    }
    if opts.ess.is_nan() || opts.ess <= 0.0 {
        return Err(format!("ess {} must be positive", opts.ess));
    }
    if opts.factors == 0 || opts.factors > 0b111 {
        return Err(format!("factors mask {:#b} invalid", opts.factors));
    }
    Ok(HyperParams {
        t: opts.significance,
        c: opts.cutoff,
        k: opts.max_sepset as usize,
        params: BdeuParams { alpha: opts.ess },
        factor_mask: (1u8..=3)
            .filter(|f| opts.factors & (1 << (f - 1)) != 0)
            .collect::<BTreeSet<u8>>(),
        ..HyperParams::default()
    })
}

/// Load a dataset bundle from a manifest file (UTF-8 path). On success
/// writes a handle to `out`; release it with `cf_bundle_free`.
///
/// # Safety
/// `manifest_path` must be a valid NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_bundle_load(
    manifest_path: *const c_char,
    out: *mut *mut CfBundle,
) -> CfStatus {
    guarded(|| {
        if manifest_path.is_null() || out.is_null() {
            set_error("null argument");
            return CfStatus::CfInvalidArgument;
        }
        let path = match unsafe { CStr::from_ptr(manifest_path) }.to_str() {
            Ok(s) => s,
            Err(_) => {
                set_error("manifest path is not valid UTF-8");
                return CfStatus::CfInvalidArgument;
            }
        };
        match load_manifest(Path::new(path)) {
            Ok(bundle) => {
                unsafe { *out = Box::into_raw(Box::new(CfBundle { inner: bundle })) };
                CfStatus::CfOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of observed variables in the bundle, or 0 for a null handle.
///
/// # Safety
/// `bundle` must be a live handle from `cf_bundle_load` or null.
#[no_mangle]
pub unsafe extern "C" fn cf_bundle_num_vars(bundle: *const CfBundle) -> u32 {
    if bundle.is_null() {
        return 0;
    }
    unsafe { &*bundle }.inner.num_vars() as u32
}

/// Release a bundle handle. Null is a no-op.
///
/// # Safety
/// `bundle` must be a live handle from `cf_bundle_load` or null; it must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cf_bundle_free(bundle: *mut CfBundle) {
    if !bundle.is_null() {
        drop(unsafe { Box::from_raw(bundle) });
    }
}

/// Run the learning pipeline on a bundle. `options` may be null for the
/// defaults. On success writes a handle to `out`; release it with
/// `cf_result_free`.
///
/// # Safety
/// `bundle` must be a live handle; `options` null or valid; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cf_learn(
    bundle: *const CfBundle,
    options: *const CfOptions,
    out: *mut *mut CfResult,
) -> CfStatus {
    guarded(|| {
        if bundle.is_null() || out.is_null() {
            set_error("null argument");
            return CfStatus::CfInvalidArgument;
        }
        let opts = if options.is_null() {
            let mut o = CfOptions {
                significance: 0.0,
                cutoff: 0.0,
                max_sepset: 0,
                ess: 0.0,
                factors: 0,
            };
            unsafe { cf_options_default(&mut o) };
            o
        } else {
            unsafe { *options }
        };
        let hyper = match hyper_from(&opts) {
            Ok(h) => h,
            Err(msg) => {
                set_error(&msg);
                return CfStatus::CfInvalidArgument;
            }
        };
        match learn_pag(&unsafe { &*bundle }.inner, &hyper) {
            Ok(output) => {
                unsafe { *out = Box::into_raw(Box::new(CfResult { inner: output })) };
                CfStatus::CfOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

fn export_string(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => c.into_raw(),
        Err(_) => ptr::null_mut(),
    }
}

/// The learnt graph in the line-per-edge text format. Free the returned
/// string with `cf_string_free`; returns null for a null handle.
///
/// # Safety
/// `result` must be a live handle from `cf_learn` or null.
#[no_mangle]
pub unsafe extern "C" fn cf_result_graph_text(result: *const CfResult) -> *mut c_char {
    if result.is_null() {
        return ptr::null_mut();
    }
    export_string(render_graph(&unsafe { &*result }.inner.pag))
}

/// Per-edge factor and posterior table as a JSON document. Free the
/// returned string with `cf_string_free`; returns null for a null handle.
///
/// # Safety
/// `result` must be a live handle from `cf_learn` or null.
#[no_mangle]
pub unsafe extern "C" fn cf_result_edge_probs_json(result: *const CfResult) -> *mut c_char {
    if result.is_null() {
        return ptr::null_mut();
    }
    let r = unsafe { &*result };
    let names: Vec<String> = r.inner.pag.names().to_vec();
    export_string(r.inner.probs.to_json(&names).to_string())
}

/// Release a result handle. Null is a no-op.
///
/// # Safety
/// `result` must be a live handle from `cf_learn` or null; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cf_result_free(result: *mut CfResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
