//! C ABI for `rlab`.
//!
//! Operators live behind opaque `RlabOperator` handles created from a TOML
//! operator table and released with [`rlab_operator_free`]. Every fallible
//! call returns an [`RlabStatus`]; on failure the message is kept per thread
//! and read back with [`rlab_last_error`]. Vectors cross the boundary as
//! separate real and imaginary `double` arrays; a null imaginary pointer
//! means a real vector. Norm exponents are `p` in `[1, 64]`, or `+inf` for
//! the sup norm of `c0`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_complex::Complex64;

use rlab::harness::{self, Scenario};
use rlab::seqspace::complexification_norm;
use rlab::{FieldMode, NormMode, OperatorSpec, TruncVec};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlabStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// The config or operator table was rejected.
    Config = 3,
    /// A vector length did not match the operator dimension.
    DimensionMismatch = 4,
    /// Computation failed (cap exceeded, non-finite result, I/O).
    Runtime = 5,
    /// A scenario ran and at least one check failed.
    CheckFailed = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Opaque operator handle.
pub struct RlabOperator {
    spec: OperatorSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let msg = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("no interior nul"));
}

struct Failure(RlabStatus, String);

impl Failure {
    fn new(status: RlabStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RlabStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside rlab");
            RlabStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(RlabStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(RlabStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn operator_arg<'a>(op: *const RlabOperator) -> Result<&'a RlabOperator, Failure> {
    op.as_ref().ok_or_else(|| Failure::new(RlabStatus::NullPointer, "operator handle is null"))
}

fn norm_mode(p: f64) -> Result<NormMode, Failure> {
    if p == f64::INFINITY {
        Ok(NormMode::Sup)
    } else {
        NormMode::lp(p).map_err(|e| Failure::new(RlabStatus::Config, e))
    }
}

unsafe fn read_vector(re: *const f64, im: *const f64, len: usize, norm: NormMode) -> Result<TruncVec, Failure> {
    if re.is_null() {
        return Err(Failure::new(RlabStatus::NullPointer, "real part is null"));
    }
    let re = std::slice::from_raw_parts(re, len);
    let v = if im.is_null() {
        TruncVec::real(re, norm)
    } else {
        let im = std::slice::from_raw_parts(im, len);
        TruncVec::complex(re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(), norm)
    };
    v.map_err(|e| Failure::new(RlabStatus::Runtime, e))
}

unsafe fn write_vector(v: &TruncVec, out_re: *mut f64, out_im: *mut f64) -> Result<(), Failure> {
    if out_re.is_null() {
        return Err(Failure::new(RlabStatus::NullPointer, "output real part is null"));
    }
    if out_im.is_null() && v.field() == FieldMode::Complex && v.coeffs().iter().any(|c| c.im != 0.0) {
        return Err(Failure::new(RlabStatus::NullPointer, "result is complex but the output imaginary part is null"));
    }
    for (k, c) in v.coeffs().iter().enumerate() {
        *out_re.add(k) = c.re;
        if !out_im.is_null() {
            *out_im.add(k) = c.im;
        }
    }
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next rlab call on the same thread.
#[no_mangle]
pub extern "C" fn rlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an operator table (the body of an `[operator]` section) and stores
/// a new handle in `*out`.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rlab_operator_from_toml(toml: *const c_char, out: *mut *mut RlabOperator) -> RlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::new(RlabStatus::NullPointer, "out is null"));
        }
        *out = ptr::null_mut();
        let text = str_arg(toml, "toml")?;
        let spec = OperatorSpec::from_toml_str(text).map_err(|e| Failure::new(RlabStatus::Config, e))?;
        *out = Box::into_raw(Box::new(RlabOperator { spec }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `op` must come from [`rlab_operator_from_toml`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rlab_operator_free(op: *mut RlabOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Truncation dimension of the operator; 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rlab_operator_dim(op: *const RlabOperator) -> usize {
    op.as_ref().map_or(0, |o| o.spec.dim())
}

/// Whether the operator maps real vectors to real vectors.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rlab_operator_is_real(op: *const RlabOperator) -> bool {
    op.as_ref().is_some_and(|o| o.spec.is_real())
}

/// `T^power x` for `x = re + i·im` of length `len`. `im` may be null for a
/// real input; `out_im` may be null when the result is real. `power = 1`
/// applies the operator once.
///
/// # Safety
/// Non-null arrays must hold `len` doubles; `op` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rlab_operator_apply_power(
    op: *const RlabOperator,
    re: *const f64,
    im: *const f64,
    len: usize,
    power: u64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RlabStatus {
    guard(|| {
        let op = operator_arg(op)?;
        if len != op.spec.dim() {
            return Err(Failure::new(
                RlabStatus::DimensionMismatch,
                format!("vector length {len}, operator dimension {}", op.spec.dim()),
            ));
        }
        let x = read_vector(re, im, len, op.spec.norm_mode())?;
        let y = op.spec.apply_power(&x, power).map_err(|e| Failure::new(RlabStatus::Runtime, e))?;
        write_vector(&y, out_re, out_im)
    })
}

/// `T x`; see [`rlab_operator_apply_power`].
///
/// # Safety
/// As for [`rlab_operator_apply_power`].
#[no_mangle]
pub unsafe extern "C" fn rlab_operator_apply(
    op: *const RlabOperator,
    re: *const f64,
    im: *const f64,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RlabStatus {
    rlab_operator_apply_power(op, re, im, len, 1, out_re, out_im)
}

/// Operator norm estimate: exact up to power-iteration tolerance for `p = 2`,
/// a sampled lower bound otherwise.
///
/// # Safety
/// `op` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rlab_operator_norm_estimate(op: *const RlabOperator, out: *mut f64) -> RlabStatus {
    guard(|| {
        let op = operator_arg(op)?;
        if out.is_null() {
            return Err(Failure::new(RlabStatus::NullPointer, "out is null"));
        }
        let est = op.spec.operator_norm_estimate(64).map_err(|e| Failure::new(RlabStatus::Runtime, e))?;
        *out = est.value;
        Ok(())
    })
}

/// Norm of `re + i·im` in `ℓ^p` (or `c0` for `p = +inf`).
///
/// # Safety
/// Non-null arrays must hold `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rlab_vector_norm(re: *const f64, im: *const f64, len: usize, p: f64, out: *mut f64) -> RlabStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure::new(RlabStatus::NullPointer, "out is null"));
        }
        let x = read_vector(re, im, len, norm_mode(p)?)?;
        *out = x.norm();
        Ok(())
    })
}

/// `‖x + iy‖ = sup_t ‖cos(t)x − sin(t)y‖` for real `x`, `y`.
///
/// # Safety
/// `x` and `y` must hold `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rlab_complexification_norm(
    x: *const f64,
    y: *const f64,
    len: usize,
    p: f64,
    out: *mut f64,
) -> RlabStatus {
    guard(|| {
        if out.is_null() || y.is_null() {
            return Err(Failure::new(RlabStatus::NullPointer, "y or out is null"));
        }
        let norm = norm_mode(p)?;
        let x = read_vector(x, ptr::null(), len, norm)?;
        let y = read_vector(y, ptr::null(), len, norm)?;
        *out = complexification_norm(&x, &y).map_err(|e| Failure::new(RlabStatus::Runtime, e))?;
        Ok(())
    })
}

/// Runs a scenario from a config file, writing artifacts into `out_dir`.
/// Returns `CheckFailed` when the scenario ran but a check failed; the
/// report is written either way. `passed` may be null.
///
/// # Safety
/// String arguments must be NUL-terminated; `passed` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn rlab_run_scenario(
    scenario: *const c_char,
    config_path: *const c_char,
    out_dir: *const c_char,
    passed: *mut c_int,
) -> RlabStatus {
    guard(|| {
        let scenario: Scenario =
            str_arg(scenario, "scenario")?.parse().map_err(|e: String| Failure::new(RlabStatus::Config, e))?;
        let config = Path::new(str_arg(config_path, "config_path")?);
        let out = Path::new(str_arg(out_dir, "out_dir")?);
        let report = harness::run_file(config, scenario, out, None).map_err(|e| {
            let status = match e {
                rlab::HarnessError::Config { .. } => RlabStatus::Config,
                _ => RlabStatus::Runtime,
            };
            Failure::new(status, e)
        })?;
        if !passed.is_null() {
            *passed = c_int::from(report.pass);
        }
        if report.pass {
            Ok(())
        } else {
            let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
            Err(Failure::new(RlabStatus::CheckFailed, format!("failed checks: {}", names.join(", "))))
        }
    })
}
