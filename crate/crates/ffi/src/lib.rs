//! C ABI over `goalrec`.
//!
//! Bundles and results are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns a [`GrStatus`];
//! on failure `gr_last_error` describes the problem. Strings returned by the
//! library are released with `gr_string_free`. Panics never cross the
//! boundary: they are reported as `GR_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use goalrec::bundle::{load_bundle, RecognitionBundle};
use goalrec::landmarks::extract_for_template;
use goalrec::recognizer_llm::{apply_response, build_prompt};
use goalrec::recognizer_lm::{recognize_lm, recognize_uniform};
use goalrec::result::RecognitionResult;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Load = 3,
    Recognize = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// A loaded recognition problem.
pub struct GrBundle(RecognitionBundle);

/// The outcome of one recogniser on one bundle.
pub struct GrResult(RecognitionResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), (GrStatus, String)>) -> GrStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GrStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (GrStatus, String)> {
    if p.is_null() {
        return Err((GrStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (GrStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (GrStatus, String)> {
    p.as_ref().ok_or((GrStatus::NullArgument, format!("{what} is null")))
}

fn out_arg<T>(p: *mut *mut T) -> Result<(), (GrStatus, String)> {
    if p.is_null() {
        Err((GrStatus::NullArgument, "output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("NULs removed").into_raw()
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn gr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads the bundle in directory `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_bundle_load(dir: *const c_char, out: *mut *mut GrBundle) -> GrStatus {
    guard(|| {
        out_arg(out)?;
        let dir = str_arg(dir, "dir")?;
        let b = load_bundle(Path::new(dir)).map_err(|e| (GrStatus::Load, e.to_string()))?;
        *out = Box::into_raw(Box::new(GrBundle(b)));
        Ok(())
    })
}

/// # Safety
/// `bundle` must come from `gr_bundle_load` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gr_bundle_free(bundle: *mut GrBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Number of candidate goals, or 0 for a null handle.
///
/// # Safety
/// `bundle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gr_bundle_hypothesis_count(bundle: *const GrBundle) -> usize {
    bundle.as_ref().map_or(0, |b| b.0.hypotheses.len())
}

/// Landmark recogniser, including landmark extraction.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_recognize_lm(bundle: *const GrBundle, out: *mut *mut GrResult) -> GrStatus {
    guard(|| {
        out_arg(out)?;
        let b = &ref_arg(bundle, "bundle")?.0;
        let lms = extract_for_template(&b.domain, &b.template, &b.hypotheses)
            .map_err(|e| (GrStatus::Recognize, e.to_string()))?;
        let mut r = recognize_lm(b, &lms.sets).map_err(|e| (GrStatus::Recognize, e.to_string()))?;
        r.extract_time = Some(lms.seconds);
        *out = Box::into_raw(Box::new(GrResult(r)));
        Ok(())
    })
}

/// Baseline that returns every candidate goal.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_recognize_uniform(bundle: *const GrBundle, out: *mut *mut GrResult) -> GrStatus {
    guard(|| {
        out_arg(out)?;
        let b = &ref_arg(bundle, "bundle")?.0;
        *out = Box::into_raw(Box::new(GrResult(recognize_uniform(b))));
        Ok(())
    })
}

/// The model prompt for `bundle`, to be released with `gr_string_free`.
///
/// # Safety
/// `bundle` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_build_prompt(bundle: *const GrBundle, out: *mut *mut c_char) -> GrStatus {
    guard(|| {
        out_arg(out)?;
        let b = &ref_arg(bundle, "bundle")?.0;
        *out = c_string(build_prompt(b).prompt);
        Ok(())
    })
}

/// Scores a model reply obtained elsewhere. Unparseable text is not an
/// error: it yields a result with status "garbage" and no prediction.
///
/// # Safety
/// `bundle` must be a live handle, `text` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gr_parse_response(
    bundle: *const GrBundle,
    text: *const c_char,
    out: *mut *mut GrResult,
) -> GrStatus {
    guard(|| {
        out_arg(out)?;
        let b = &ref_arg(bundle, "bundle")?.0;
        let text = str_arg(text, "text")?;
        let mut r = RecognitionResult::empty("response", &b.id);
        apply_response(&mut r, text, b);
        *out = Box::into_raw(Box::new(GrResult(r)));
        Ok(())
    })
}

/// Size of the predicted goal set, or 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gr_result_spread(result: *const GrResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.spread())
}

/// Copies the predicted hypothesis indices, ascending, into `buf`. `len`
/// receives the number of indices even when `cap` is too small, in which
/// case nothing is copied and `GR_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `result` must be a live handle, `buf` valid for `cap` writes (may be
/// null when `cap` is 0), `len` writable.
#[no_mangle]
pub unsafe extern "C" fn gr_result_predicted(
    result: *const GrResult,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> GrStatus {
    guard(|| {
        let r = &ref_arg(result, "result")?.0;
        if len.is_null() {
            return Err((GrStatus::NullArgument, "len is null".into()));
        }
        *len = r.predicted.len();
        if r.predicted.len() > cap {
            return Err((GrStatus::BufferTooSmall, format!("need {} slots", r.predicted.len())));
        }
        if !r.predicted.is_empty() && buf.is_null() {
            return Err((GrStatus::NullArgument, "buf is null".into()));
        }
        for (i, &p) in r.predicted.iter().enumerate() {
            *buf.add(i) = p;
        }
        Ok(())
    })
}

/// The whole result as JSON, to be released with `gr_string_free`.
///
/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gr_result_to_json(result: *const GrResult, out: *mut *mut c_char) -> GrStatus {
    guard(|| {
        out_arg(out)?;
        let r = &ref_arg(result, "result")?.0;
        let json = serde_json::to_string(r).map_err(|e| (GrStatus::Recognize, e.to_string()))?;
        *out = c_string(json);
        Ok(())
    })
}

/// # Safety
/// `result` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gr_result_free(result: *mut GrResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn gr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
