//! C interface to `cirsum`.
//!
//! Models are opaque handles created by [`cirsum_model_new`] and released by
//! [`cirsum_model_free`]. Every other call returns a [`CirsumStatus`]; on a
//! nonzero status, [`cirsum_last_error`] gives a message for the calling
//! thread, valid until that thread's next call into this library.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cirsum::validate::simulate_sum;
use cirsum::{CirFactor, Error, EvalResult, SumModel, TruncationMethod, TruncationPolicy};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirsumStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Feller = 3,
    Budget = 4,
    NonConvergence = 5,
    Quadrature = 6,
    Degenerate = 7,
    InvalidArgument = 8,
    Panic = 9,
}

/// Poisson truncation method.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirsumTrunc {
    Tail = 0,
    Normal = 1,
    Window = 2,
}

/// Opaque model handle.
pub struct CirsumModel {
    model: SumModel,
}

/// One CIR factor as plain data.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CirsumFactor {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub x0: f64,
    pub weight: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CirsumStatus {
    match e {
        Error::Domain { .. } => CirsumStatus::Domain,
        Error::Feller { .. } => CirsumStatus::Feller,
        Error::Budget { .. } => CirsumStatus::Budget,
        Error::NonConvergence { .. } => CirsumStatus::NonConvergence,
        Error::Quadrature { .. } => CirsumStatus::Quadrature,
        Error::Degenerate(_) => CirsumStatus::Degenerate,
        Error::Config { .. } | Error::Io(_) => CirsumStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into a status and a message.
fn guard<F: FnOnce() -> Result<(), (CirsumStatus, String)>>(f: F) -> CirsumStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CirsumStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CirsumStatus::Panic
        }
    }
}

fn lib(e: Error) -> (CirsumStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (CirsumStatus, String) {
    (CirsumStatus::NullPointer, format!("{what} is null"))
}

unsafe fn model_ref<'a>(m: *const CirsumModel) -> Result<&'a SumModel, (CirsumStatus, String)> {
    m.as_ref().map(|h| &h.model).ok_or_else(|| null("model"))
}

fn policy(trunc: CirsumTrunc, eps: f64) -> Result<TruncationPolicy, (CirsumStatus, String)> {
    let method = match trunc {
        CirsumTrunc::Tail => TruncationMethod::TailQuantile,
        CirsumTrunc::Normal => TruncationMethod::NormalApprox,
        CirsumTrunc::Window => TruncationMethod::WeightWindow,
    };
    TruncationPolicy::new(method, eps).map_err(lib)
}

/// Message for the last failed call on this thread; empty after a success.
#[no_mangle]
pub extern "C" fn cirsum_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Build a model. On success `*out` owns a handle to pass to
/// [`cirsum_model_free`].
///
/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn cirsum_model_new(
    f1: CirsumFactor,
    f2: CirsumFactor,
    dt: f64,
    out: *mut *mut CirsumModel,
) -> CirsumStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let mk = |f: CirsumFactor| CirFactor::new(f.kappa, f.theta, f.sigma, f.x0, f.weight);
        let model = SumModel::new(mk(f1).map_err(lib)?, mk(f2).map_err(lib)?, dt).map_err(lib)?;
        *out = Box::into_raw(Box::new(CirsumModel { model }));
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a handle from [`cirsum_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cirsum_model_free(m: *mut CirsumModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

unsafe fn eval_many(
    m: *const CirsumModel,
    xs: *const f64,
    n: usize,
    trunc: CirsumTrunc,
    eps: f64,
    values: *mut f64,
    bounds: *mut f64,
    cdf: bool,
) -> CirsumStatus {
    guard(|| {
        let model = model_ref(m)?;
        if n == 0 {
            return Ok(());
        }
        if xs.is_null() || values.is_null() {
            return Err(null(if xs.is_null() { "xs" } else { "values" }));
        }
        let xs = std::slice::from_raw_parts(xs, n);
        let ev = model.evaluator(&policy(trunc, eps)?).map_err(lib)?;
        let r: Vec<EvalResult> = if cdf { ev.cdf_many(xs) } else { ev.pdf_many(xs) }.map_err(lib)?;
        let out = std::slice::from_raw_parts_mut(values, n);
        for (o, r) in out.iter_mut().zip(&r) {
            *o = r.value;
        }
        if !bounds.is_null() {
            let out = std::slice::from_raw_parts_mut(bounds, n);
            for (o, r) in out.iter_mut().zip(&r) {
                *o = r.trunc_error_bound;
            }
        }
        Ok(())
    })
}

/// Density at `n` points `xs[i] > 0`. `bounds` may be null.
///
/// # Safety
/// `xs`, `values` and a non-null `bounds` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn cirsum_pdf(
    m: *const CirsumModel,
    xs: *const f64,
    n: usize,
    trunc: CirsumTrunc,
    eps: f64,
    values: *mut f64,
    bounds: *mut f64,
) -> CirsumStatus {
    eval_many(m, xs, n, trunc, eps, values, bounds, false)
}

/// CDF at `n` points `xs[i] >= 0`. `bounds` may be null.
///
/// # Safety
/// As for [`cirsum_pdf`].
#[no_mangle]
pub unsafe extern "C" fn cirsum_cdf(
    m: *const CirsumModel,
    xs: *const f64,
    n: usize,
    trunc: CirsumTrunc,
    eps: f64,
    values: *mut f64,
    bounds: *mut f64,
) -> CirsumStatus {
    eval_many(m, xs, n, trunc, eps, values, bounds, true)
}

/// Closed-form mean and variance.
///
/// # Safety
/// `mean` and `variance` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn cirsum_moments(m: *const CirsumModel, mean: *mut f64, variance: *mut f64) -> CirsumStatus {
    guard(|| {
        let model = model_ref(m)?;
        if mean.is_null() || variance.is_null() {
            return Err(null("output"));
        }
        let (a, b) = model.moments();
        *mean = a;
        *variance = b;
        Ok(())
    })
}

/// `E[exp(-u S)]` in closed form, for `u` above the pole.
///
/// # Safety
/// `value` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn cirsum_laplace(m: *const CirsumModel, u: f64, value: *mut f64) -> CirsumStatus {
    guard(|| {
        let model = model_ref(m)?;
        if value.is_null() {
            return Err(null("value"));
        }
        *value = model.laplace_closed(u).map_err(lib)?;
        Ok(())
    })
}

/// `n` exact draws of the sum, deterministic in `seed`.
///
/// # Safety
/// `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn cirsum_simulate(m: *const CirsumModel, n: usize, seed: u64, out: *mut f64) -> CirsumStatus {
    guard(|| {
        let model = model_ref(m)?;
        if n == 0 {
            return Ok(());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let xs = simulate_sum(model, n, seed);
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&xs);
        Ok(())
    })
}
