//! C interface to the closed-form propagators.
//!
//! Parameter sets and forces are opaque heap handles created by `qosc_*_new` style
//! functions and released with the matching `_free`. Every fallible function returns a
//! [`QoscStatus`]; on failure the message is available from [`qosc_last_error`] on the
//! same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qosc::driving::forced_trajectory;
use qosc::model::renormalized_frequency;
use qosc::propagator::{evolve_covariance, free_displacement, stationary_state};
use qosc::{Error, ForceModel, GaussianState, ModelParams, Regime};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QoscStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    InvalidState = 3,
    Unstable = 4,
    Numerical = 5,
    Panic = 6,
}

/// Damping regime, as returned by [`qosc_model_frequency`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QoscRegime {
    Underdamped = 0,
    Critical = 1,
    Overdamped = 2,
    Unstable = 3,
}

/// Opaque parameter set.
pub struct QoscModel(ModelParams);

/// Opaque driving force.
pub struct QoscForce(ForceModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QoscStatus {
    match e {
        Error::InvalidParameter(_) | Error::Config(_) | Error::ExceptionalPoint(_) => QoscStatus::InvalidParameter,
        Error::InvalidState(_) | Error::NonNormalizable { .. } => QoscStatus::InvalidState,
        Error::Unstable(_) => QoscStatus::Unstable,
        _ => QoscStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (QoscStatus, String)>) -> QoscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QoscStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("panic: {msg}"));
            QoscStatus::Panic
        }
    }
}

fn lib(e: Error) -> (QoscStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (QoscStatus, String) {
    (QoscStatus::NullPointer, format!("{name} is null"))
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn qosc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qosc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a parameter set `(omega0, gamma, theta1, theta2, eta0, eta1, eta2)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qosc_model_new(
    omega0: f64,
    gamma: f64,
    theta1: f64,
    theta2: f64,
    eta0: f64,
    eta1: f64,
    eta2: f64,
    out: *mut *mut QoscModel,
) -> QoscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = ModelParams::new(omega0, gamma, theta1, theta2, eta0, eta1, eta2).map_err(lib)?;
        *out = Box::into_raw(Box::new(QoscModel(p)));
        Ok(())
    })
}

/// Creates the standard damping set with bath occupation `nbar`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qosc_model_gksl(omega0: f64, gamma: f64, nbar: f64, out: *mut *mut QoscModel) -> QoscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = ModelParams::gksl(omega0, gamma, nbar).map_err(lib)?;
        *out = Box::into_raw(Box::new(QoscModel(p)));
        Ok(())
    })
}

/// Releases a parameter set; null is ignored.
///
/// # Safety
/// `model` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qosc_model_free(model: *mut QoscModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Renormalized frequency `omega = re + i im` and the damping regime.
///
/// # Safety
/// `model` must be a live handle; the output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qosc_model_frequency(
    model: *const QoscModel,
    re: *mut f64,
    im: *mut f64,
    regime: *mut QoscRegime,
) -> QoscStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if re.is_null() || im.is_null() || regime.is_null() {
            return Err(null("output"));
        }
        let info = renormalized_frequency(&m.0);
        let w = info.omega();
        *re = w.re;
        *im = w.im;
        *regime = match info.regime {
            Regime::Underdamped => QoscRegime::Underdamped,
            Regime::Critical => QoscRegime::Critical,
            Regime::Overdamped => QoscRegime::Overdamped,
            Regime::Unstable => QoscRegime::Unstable,
        };
        Ok(())
    })
}

unsafe fn new_force(force: ForceModel, out: *mut *mut QoscForce) -> QoscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        force.validate().map_err(lib)?;
        *out = Box::into_raw(Box::new(QoscForce(force)));
        Ok(())
    })
}

/// Constant force `lambda = lr + i li`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qosc_force_constant(lr: f64, li: f64, out: *mut *mut QoscForce) -> QoscStatus {
    new_force(ForceModel::Constant { lr, li }, out)
}

/// Impulses `A delta(t - a) + i B delta(t - b)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qosc_force_impulse(amp_a: f64, a_time: f64, amp_b: f64, b_time: f64, out: *mut *mut QoscForce) -> QoscStatus {
    new_force(ForceModel::Impulse { amp_a, a_time, amp_b, b_time }, out)
}

/// Steps `A H(t - a) + i B H(t - b)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qosc_force_heaviside(
    amp_a: f64,
    a_time: f64,
    amp_b: f64,
    b_time: f64,
    out: *mut *mut QoscForce,
) -> QoscStatus {
    new_force(ForceModel::Heaviside { amp_a, a_time, amp_b, b_time }, out)
}

/// Rotating force `R e^{i Omega t}`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qosc_force_harmonic(amp: f64, omega: f64, out: *mut *mut QoscForce) -> QoscStatus {
    new_force(ForceModel::Harmonic { amp, omega }, out)
}

/// Piecewise-linear force through `n` samples, zero outside the sampled interval.
///
/// # Safety
/// `times`, `lr` and `li` must each point to `n` readable values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qosc_force_sampled(
    times: *const f64,
    lr: *const f64,
    li: *const f64,
    n: usize,
    out: *mut *mut QoscForce,
) -> QoscStatus {
    if times.is_null() || lr.is_null() || li.is_null() {
        return guard(|| Err(null("samples")));
    }
    let slice = |p: *const f64| std::slice::from_raw_parts(p, n).to_vec();
    new_force(ForceModel::Sampled { times: slice(times), lr_values: slice(lr), li_values: slice(li) }, out)
}

/// Releases a force; null is ignored.
///
/// # Safety
/// `force` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qosc_force_free(force: *mut QoscForce) {
    if !force.is_null() {
        drop(Box::from_raw(force));
    }
}

/// First moments `(q, p)` at the `n` times, starting from `(q0, p0)`. `force` may be null
/// for free evolution.
///
/// # Safety
/// `model` must be a live handle, `force` null or live; `times` must hold `n` values and
/// `q_out`, `p_out` room for `n` values each.
#[no_mangle]
pub unsafe extern "C" fn qosc_first_moments(
    model: *const QoscModel,
    force: *const QoscForce,
    q0: f64,
    p0: f64,
    times: *const f64,
    n: usize,
    q_out: *mut f64,
    p_out: *mut f64,
) -> QoscStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if n > 0 && (times.is_null() || q_out.is_null() || p_out.is_null()) {
            return Err(null("array"));
        }
        for i in 0..n {
            let t = *times.add(i);
            let (q, p) = match force.as_ref() {
                Some(f) => forced_trajectory(&m.0, &f.0, q0, p0, t),
                None => free_displacement(&m.0, q0, p0, t),
            }
            .map_err(lib)?;
            *q_out.add(i) = q;
            *p_out.add(i) = p;
        }
        Ok(())
    })
}

/// Second moments `(sigma_xx, sigma_pp, sigma_xp)` at time `t` from a Gaussian state with
/// kernel parameters `(mu, nu, kappa)`.
///
/// # Safety
/// `model` must be a live handle and `out` must have room for three values.
#[no_mangle]
pub unsafe extern "C" fn qosc_second_moments(
    model: *const QoscModel,
    mu: f64,
    nu: f64,
    kappa: f64,
    t: f64,
    out: *mut f64,
) -> QoscStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s0 = GaussianState::new(mu, nu, kappa, 0.0, 0.0).map_err(lib)?;
        let s = evolve_covariance(&m.0, &s0, t).map_err(lib)?.second_moments();
        *out = s.sxx;
        *out.add(1) = s.spp;
        *out.add(2) = s.sxp;
        Ok(())
    })
}

/// Stationary second moments `(sigma_xx, sigma_pp, sigma_xp)`.
///
/// # Safety
/// `model` must be a live handle and `out` must have room for three values.
#[no_mangle]
pub unsafe extern "C" fn qosc_stationary_moments(model: *const QoscModel, out: *mut f64) -> QoscStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = stationary_state(&m.0).map_err(lib)?.second_moments();
        *out = s.sxx;
        *out.add(1) = s.spp;
        *out.add(2) = s.sxp;
        Ok(())
    })
}
