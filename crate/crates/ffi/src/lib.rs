//! C ABI over `drisk`.
//!
//! Objects are opaque handles created by the `*_parse` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`DriskStatus`]; on failure a message is kept per thread and can be read
//! with [`drisk_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use drisk::cli::parse_distribution;
use drisk::distortion::{classify_shape, parse_distortion, Distortion, ShapeReport};
use drisk::distributions::Distribution;
use drisk::measures;
use drisk::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriskStatus {
    Ok = 0,
    Parse = 1,
    Domain = 2,
    Divergence = 3,
    Unsupported = 4,
    NullPointer = 5,
    Io = 6,
    Panic = 7,
}

/// Shape reported by [`drisk_distortion_classify`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriskShape {
    Linear = 0,
    Concave = 1,
    Convex = 2,
    Neither = 3,
    Piecewise = 4,
}

/// Opaque distortion function.
pub struct DriskDistortion(Distortion);

/// Opaque loss distribution.
pub struct DriskDistribution(Distribution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DriskStatus {
    match e {
        Error::Parse { .. } => DriskStatus::Parse,
        Error::Divergence(_) => DriskStatus::Divergence,
        Error::Unsupported(_) => DriskStatus::Unsupported,
        Error::Io(_) => DriskStatus::Io,
        _ => DriskStatus::Domain,
    }
}

/// Run `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), DriskStatus>) -> DriskStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DriskStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            DriskStatus::Panic
        }
    }
}

fn fail(e: Error) -> DriskStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> DriskStatus {
    set_error(format!("{what} is null"));
    DriskStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, DriskStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        DriskStatus::Parse
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, DriskStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, DriskStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn drisk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn drisk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a distortion spec such as `"tvar:0.95"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drisk_distortion_parse(spec: *const c_char, out: *mut *mut DriskDistortion) -> DriskStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let g = parse_distortion(str_arg(spec, "spec")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(DriskDistortion(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must come from [`drisk_distortion_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn drisk_distortion_free(g: *mut DriskDistortion) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// g(u), with u clamped to [0, 1].
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drisk_distortion_eval(g: *const DriskDistortion, u: f64, out: *mut f64) -> DriskStatus {
    guard(|| {
        let g = handle(g, "distortion")?;
        *out_arg(out, "out")? = g.0.eval(u);
        Ok(())
    })
}

/// Grid classification of g on `grid` cells (at least 16).
///
/// # Safety
/// `g` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drisk_distortion_classify(
    g: *const DriskDistortion,
    grid: usize,
    out: *mut DriskShape,
) -> DriskStatus {
    guard(|| {
        let g = handle(g, "distortion")?;
        let out = out_arg(out, "out")?;
        *out = match classify_shape(&g.0, grid).map_err(fail)? {
            ShapeReport::Linear => DriskShape::Linear,
            ShapeReport::Concave => DriskShape::Concave,
            ShapeReport::Convex => DriskShape::Convex,
            ShapeReport::Neither => DriskShape::Neither,
            ShapeReport::Piecewise(_) => DriskShape::Piecewise,
        };
        Ok(())
    })
}

/// Parse a distribution descriptor such as `"pareto:2,1"` or
/// `"discrete:0:0.6,100:0.4"`.
///
/// # Safety
/// `desc` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drisk_distribution_parse(desc: *const c_char, out: *mut *mut DriskDistribution) -> DriskStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let d = parse_distribution(str_arg(desc, "descriptor")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(DriskDistribution(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must come from [`drisk_distribution_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn drisk_distribution_free(d: *mut DriskDistribution) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// P(X > x).
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drisk_distribution_survival(d: *const DriskDistribution, x: f64, out: *mut f64) -> DriskStatus {
    guard(|| {
        let d = handle(d, "distribution")?;
        *out_arg(out, "out")? = d.0.survival(x);
        Ok(())
    })
}

/// ρ_g[X]. `abs_error` may be NULL.
///
/// # Safety
/// Handles must be live; `value` must be valid, `abs_error` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn drisk_choquet(
    g: *const DriskDistortion,
    d: *const DriskDistribution,
    value: *mut f64,
    abs_error: *mut f64,
) -> DriskStatus {
    guard(|| {
        let g = handle(g, "distortion")?;
        let d = handle(d, "distribution")?;
        let value = out_arg(value, "value")?;
        let r = measures::choquet(&g.0, &d.0).map_err(fail)?;
        *value = r.value;
        if let Some(e) = abs_error.as_mut() {
            *e = r.abs_error_estimate;
        }
        Ok(())
    })
}

/// Lower p-quantile.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drisk_var(d: *const DriskDistribution, p: f64, out: *mut f64) -> DriskStatus {
    guard(|| {
        let d = handle(d, "distribution")?;
        *out_arg(out, "out")? = measures::var(&d.0, p).map_err(fail)?;
        Ok(())
    })
}

/// Tail value at risk at level p.
///
/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn drisk_tvar(d: *const DriskDistribution, p: f64, out: *mut f64) -> DriskStatus {
    guard(|| {
        let d = handle(d, "distribution")?;
        *out_arg(out, "out")? = measures::tvar(&d.0, p).map_err(fail)?;
        Ok(())
    })
}
