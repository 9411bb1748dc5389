//! C interface to `homocalc`.
//!
//! Functions and saddle families are opaque handles. Every call returns an
//! [`HcStatus`]; on failure [`hc_last_error`] describes what went wrong on
//! the calling thread. Element tuples are passed as flat row-major arrays:
//! `n` elements of length `m`, element `i` at `fs[i * m .. (i + 1) * m]`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use homocalc::fcalc::{fc_saddle, fc_semicontinuous, saddle_build, saddle_eval, SaddleFamily};
use homocalc::homog::{builtin, Family, FamilyDocument, Representation};
use homocalc::{Error, ErrorClass, LatticeElement, PhFunction};

/// Result codes. Input and numerical errors use the same numbers as the
/// command-line exit statuses.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HcStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or a size mismatch at the boundary.
    InvalidArgument = 1,
    /// Schema, dimension or other input error reported by the library.
    InputError = 2,
    /// NoConvergence, EmptyIntersection, SaddleGap and related failures.
    NumericalError = 3,
    /// A panic was caught at the boundary.
    Panic = 4,
}

/// A positively homogeneous function with its family representation.
pub struct HcFunction(PhFunction);

/// A finite saddle family.
pub struct HcSaddle(SaddleFamily);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(HcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.class() {
            ErrorClass::Input => HcStatus::InputError,
            ErrorClass::Numerical => HcStatus::NumericalError,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(HcStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HcStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            HcStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| invalid(format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn tuple(fs: *const f64, n: usize, m: usize) -> Result<Vec<LatticeElement>, Failure> {
    let total = n.checked_mul(m).ok_or_else(|| invalid("n * m overflows"))?;
    let flat = slice(fs, total, "fs")?;
    if m == 0 {
        return Ok(vec![LatticeElement::Rm(Vec::new()); n]);
    }
    Ok(flat
        .chunks(m)
        .map(|c| LatticeElement::Rm(c.to_vec()))
        .collect())
}

unsafe fn write_rm(e: &LatticeElement, out: *mut f64, m: usize) -> Result<(), Failure> {
    let values = e.as_rm().ok_or_else(|| invalid("result is not in R^m"))?;
    if values.len() != m {
        return Err(invalid(format!(
            "result has length {}, buffer {m}",
            values.len()
        )));
    }
    if m > 0 {
        if out.is_null() {
            return Err(invalid("out is null"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, m);
    }
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn hc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Look up a built-in function by name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_function_builtin(
    name: *const c_char,
    out: *mut *mut HcFunction,
) -> HcStatus {
    guard(|| {
        let h = builtin(text(name, "name")?)?;
        put(out, Box::into_raw(Box::new(HcFunction(h))), "out")
    })
}

/// Load a function from a family JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_function_from_json(
    json: *const c_char,
    out: *mut *mut HcFunction,
) -> HcStatus {
    guard(|| {
        let h = FamilyDocument::parse(text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(HcFunction(h))), "out")
    })
}

/// # Safety
/// `h` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hc_function_free(h: *mut HcFunction) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of arguments of `h`, or 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hc_function_dim(h: *const HcFunction) -> usize {
    h.as_ref().map_or(0, |h| h.0.dim())
}

/// Evaluate `h` at `x` (length `len`) through its family.
///
/// # Safety
/// `x` must point to `len` doubles; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_eval(
    h: *const HcFunction,
    x: *const f64,
    len: usize,
    tol: f64,
    value: *mut f64,
) -> HcStatus {
    guard(|| {
        let h = handle(h, "h")?;
        let v = h.0.eval_family(slice(x, len, "x")?, tol)?.value;
        put(value, v, "value")
    })
}

/// `h(f1, ..., fn)` for `n` elements of R^m; writes `m` doubles to `out`.
///
/// # Safety
/// `fs` must point to `n * m` doubles and `out` to `m` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hc_fc_rm(
    h: *const HcFunction,
    fs: *const f64,
    n: usize,
    m: usize,
    tol: f64,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let h = handle(h, "h")?;
        let r = fc_semicontinuous(&h.0, &tuple(fs, n, m)?, tol)?;
        write_rm(&r.element, out, m)
    })
}

/// Build a saddle family from a continuous function whose two families are
/// finite lists.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_saddle_build(
    h: *const HcFunction,
    tol: f64,
    out: *mut *mut HcSaddle,
) -> HcStatus {
    guard(|| {
        let h = handle(h, "h")?;
        let Representation::Continuous {
            inf: Family::Finite(phis),
            sup: Family::Finite(psis),
        } = h.0.representation()
        else {
            return Err(Failure(
                HcStatus::InputError,
                format!(
                    "saddle_build: {} needs finite sublinear and superlinear map lists",
                    h.0.name()
                ),
            ));
        };
        let s = saddle_build(phis, psis, tol)?;
        put(out, Box::into_raw(Box::new(HcSaddle(s))), "out")
    })
}

/// Load a saddle family from the JSON written by [`hc_saddle_to_json`].
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_saddle_from_json(
    json: *const c_char,
    out: *mut *mut HcSaddle,
) -> HcStatus {
    guard(|| {
        let s: SaddleFamily = homocalc::json::from_str("saddle_from_json", text(json, "json")?)?;
        put(out, Box::into_raw(Box::new(HcSaddle(s))), "out")
    })
}

/// Serialize a saddle family. Release the string with [`hc_string_free`].
///
/// # Safety
/// `s` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_saddle_to_json(s: *const HcSaddle, out: *mut *mut c_char) -> HcStatus {
    guard(|| {
        let s = handle(s, "s")?;
        let json = serde_json::to_string(&s.0)
            .map_err(|e| Failure(HcStatus::InputError, e.to_string()))?;
        let c = CString::new(json).map_err(|e| Failure(HcStatus::InputError, e.to_string()))?;
        put(out, c.into_raw(), "out")
    })
}

/// Both orderings of the saddle at `x`.
///
/// # Safety
/// `x` must point to `len` doubles; `infsup` and `supinf` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hc_saddle_eval(
    s: *const HcSaddle,
    x: *const f64,
    len: usize,
    infsup: *mut f64,
    supinf: *mut f64,
) -> HcStatus {
    guard(|| {
        let s = handle(s, "s")?;
        let v = saddle_eval(&s.0, slice(x, len, "x")?)?;
        put(infsup, v.infsup, "infsup")?;
        put(supinf, v.supinf, "supinf")
    })
}

/// The calculus through a saddle family on `n` elements of R^m. Fails with
/// a numerical error when the two orderings differ by more than `tol`.
///
/// # Safety
/// `fs` must point to `n * m` doubles and `out` to `m` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hc_saddle_fc_rm(
    s: *const HcSaddle,
    fs: *const f64,
    n: usize,
    m: usize,
    tol: f64,
    out: *mut f64,
) -> HcStatus {
    guard(|| {
        let s = handle(s, "s")?;
        let e = fc_saddle(&s.0, &tuple(fs, n, m)?, tol)?;
        write_rm(&e, out, m)
    })
}

/// # Safety
/// `s` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn hc_saddle_free(s: *mut HcSaddle) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must come from [`hc_saddle_to_json`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
