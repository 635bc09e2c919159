//! C ABI over the bannerforge engine.
//!
//! Every fallible entry point returns a `BfStatus`. On failure the message
//! is available from `bf_last_error` on the same thread until the next call.
//! Strings and buffers handed out by this library must be released with
//! `bf_string_free` / `bf_buffer_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use bannerforge::config::EngineConfig;
use bannerforge::error::Error;
use bannerforge::pipeline::Engine;
use bannerforge::request::parse_request_line;
use bannerforge::template::{load_library, LibraryError};

/// Result codes. Values 1 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    Generic = 1,
    EmptyRecall = 2,
    Io = 3,
    Config = 4,
    Null = 5,
    Utf8 = 6,
    Panic = 7,
}

/// Opaque engine handle.
pub struct BfEngine {
    engine: Engine,
}

/// Byte buffer owned by this library.
#[repr(C)]
pub struct BfBuffer {
    pub data: *mut u8,
    pub len: usize,
}

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

fn status_of(err: &Error) -> BfStatus {
    match err.exit_code() {
        2 => BfStatus::EmptyRecall,
        3 => BfStatus::Io,
        4 => BfStatus::Config,
        _ => BfStatus::Generic,
    }
}

struct Fail(BfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            BfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(BfStatus::Null, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(BfStatus::Utf8, format!("{name} is not valid UTF-8")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Loads an engine from a TOML config file.
///
/// # Safety
/// `config_path` must be a valid NUL-terminated string and `out` a valid
/// pointer. On success `*out` owns a handle to release with `bf_engine_free`.
#[no_mangle]
pub unsafe extern "C" fn bf_engine_open(config_path: *const c_char, out: *mut *mut BfEngine) -> BfStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail(BfStatus::Null, "out is null".into()));
        }
        *out = ptr::null_mut();
        let path = str_arg(config_path, "config_path")?;
        let cfg = EngineConfig::load(Path::new(path)).map_err(Error::from)?;
        let engine = Engine::load(cfg).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(BfEngine { engine }));
        Ok(())
    })
}

/// # Safety
/// `engine` must come from `bf_engine_open` and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_engine_free(engine: *mut BfEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Number of templates in the engine's library.
///
/// # Safety
/// `engine` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn bf_engine_template_count(engine: *const BfEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.engine.library.len())
}

/// Lints a template library directory. A library that loads but breaks
/// schema rules still returns `Ok`, with `*violations` > 0 and the report
/// in `bf_last_error`.
///
/// # Safety
/// `library_dir` must be a valid NUL-terminated string; `violations` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_lint(library_dir: *const c_char, violations: *mut usize) -> BfStatus {
    let mut report = None;
    let status = guard(|| {
        if violations.is_null() {
            return Err(Fail(BfStatus::Null, "violations is null".into()));
        }
        *violations = 0;
        let dir = str_arg(library_dir, "library_dir")?;
        match load_library(dir) {
            Ok(_) => Ok(()),
            Err(e @ LibraryError::Validation(_)) => {
                *violations = e.violation_count();
                report = Some(e.to_string());
                Ok(())
            }
            Err(e @ LibraryError::Io { .. }) => Err(Fail(BfStatus::Io, e.to_string())),
            Err(e) => Err(Fail(BfStatus::Config, e.to_string())),
        }
    });
    if let Some(r) = report {
        set_error(r);
    }
    status
}

/// Synthesizes one banner from a request line in the batch syntax
/// (`--product PATH --text TEXT ... --size WxH`). Product paths resolve
/// against `base_dir`. On success `*png` holds the encoded image and
/// `*provenance` the JSON provenance record.
///
/// # Safety
/// String arguments must be valid NUL-terminated strings; `png` and
/// `provenance` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_synth(
    engine: *const BfEngine,
    request: *const c_char,
    base_dir: *const c_char,
    seed: u64,
    png: *mut BfBuffer,
    provenance: *mut *mut c_char,
) -> BfStatus {
    guard(|| {
        if png.is_null() || provenance.is_null() {
            return Err(Fail(BfStatus::Null, "output pointer is null".into()));
        }
        *png = BfBuffer { data: ptr::null_mut(), len: 0 };
        *provenance = ptr::null_mut();
        let engine = engine.as_ref().ok_or_else(|| Fail(BfStatus::Null, "engine is null".into()))?;
        let line = str_arg(request, "request")?;
        let base = PathBuf::from(str_arg(base_dir, "base_dir")?);
        let req = parse_request_line(line).and_then(|a| a.to_request(&base, seed)).map_err(Error::from)?;
        let out = engine
            .engine
            .synthesize(&req, 1)
            .map_err(Error::from)?
            .pop()
            .ok_or_else(|| Fail(BfStatus::Generic, "no output".into()))?;
        let bytes = out.png().into_boxed_slice();
        let len = bytes.len();
        *png = BfBuffer { data: Box::into_raw(bytes).cast(), len };
        *provenance = into_c_string(out.provenance.to_json());
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `buf` must have been filled by this library; it is reset to empty.
#[no_mangle]
pub unsafe extern "C" fn bf_buffer_free(buf: *mut BfBuffer) {
    let Some(b) = buf.as_mut() else { return };
    if !b.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(b.data, b.len)));
    }
    b.data = ptr::null_mut();
    b.len = 0;
}
