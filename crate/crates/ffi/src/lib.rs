//! C interface to the hallmech library.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_parse` functions and released by the matching `*_free`. Every
//! fallible call returns an [`HmStatus`]; on failure the message is kept
//! per thread and can be copied out with [`hm_last_error_message`]. Panics
//! are caught at the boundary and reported as [`HmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hallmech::auctions::{eager_run, full_surplus_demo, ExactTwoBuyer, ReservePolicy};
use hallmech::ironing::{compute_threshold, ironed_virtual, PiecewiseVirtual, VirtualValue};
use hallmech::pricing::{brute_force_price, optimal_price, thresholds, Regime};
use hallmech::{Error, Prior};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmStatus {
    Ok = 0,
    InvalidParameter = 1,
    Parse = 2,
    Config = 3,
    NotRegular = 4,
    NotLogConcave = 5,
    Numerical = 6,
    Singular = 7,
    UnresolvedHybrid = 8,
    NullPointer = 9,
    Panic = 10,
}

/// Pricing regime reported by [`hm_optimal_price`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmRegime {
    Ignore = 0,
    Follow = 1,
    Cap = 2,
    FollowAgain = 3,
    Unclassified = 4,
}

/// Reserve policy selector for [`hm_exact_two_buyer_revenue`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmPolicy {
    SpaIgnore = 0,
    SignalEager = 1,
    /// Uses the `k` argument.
    KUncapped = 2,
}

/// Opaque prior distribution.
pub struct HmPrior(Prior);

/// Opaque ironed virtual value for one `(prior, gamma, signal)`.
pub struct HmVirtual(PiecewiseVirtual);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HmStatus {
    match e {
        Error::InvalidParameter(_) => HmStatus::InvalidParameter,
        Error::Parse { .. } => HmStatus::Parse,
        Error::Config(_) => HmStatus::Config,
        Error::NotRegular { .. } => HmStatus::NotRegular,
        Error::NotLogConcave { .. } => HmStatus::NotLogConcave,
        Error::Numerical(_) => HmStatus::Numerical,
        Error::Singular(_) => HmStatus::Singular,
        Error::UnresolvedHybrid => HmStatus::UnresolvedHybrid,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> HmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HmStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer passed as `{name}`"));
            HmStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            HmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(name))
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len` bytes) and returns the length of the full
/// message excluding the terminator; 0 when no error was recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses a prior token such as `beta:5,1` into a new handle.
///
/// # Safety
/// `token` must be a NUL-terminated string and `out_prior` writable.
#[no_mangle]
pub unsafe extern "C" fn hm_prior_parse(token: *const c_char, out_prior: *mut *mut HmPrior) -> HmStatus {
    guard(|| {
        let out_prior = out(out_prior, "out_prior")?;
        if token.is_null() {
            return Err(Failure::Null("token"));
        }
        let text = CStr::from_ptr(token)
            .to_str()
            .map_err(|e| Error::Parse { pos: e.valid_up_to(), msg: "token is not UTF-8".into() })?;
        *out_prior = Box::into_raw(Box::new(HmPrior(Prior::parse(text)?)));
        Ok(())
    })
}

/// Releases a prior handle; null is ignored.
///
/// # Safety
/// `prior` must come from [`hm_prior_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hm_prior_free(prior: *mut HmPrior) {
    if !prior.is_null() {
        drop(Box::from_raw(prior));
    }
}

/// Support `[lo, hi]` of the prior.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_prior_support(prior: *const HmPrior, lo: *mut f64, hi: *mut f64) -> HmStatus {
    guard(|| {
        let p = deref(prior, "prior")?;
        let (a, b) = p.0.support();
        *out(lo, "lo")? = a;
        *out(hi, "hi")? = b;
        Ok(())
    })
}

/// Cumulative distribution function at `v`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_prior_cdf(prior: *const HmPrior, v: f64, result: *mut f64) -> HmStatus {
    guard(|| {
        *out(result, "result")? = deref(prior, "prior")?.0.cdf(v);
        Ok(())
    })
}

/// End of the ironed interval that starts at the signal.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_compute_threshold(prior: *const HmPrior, gamma: f64, signal: f64, result: *mut f64) -> HmStatus {
    guard(|| {
        *out(result, "result")? = compute_threshold(&deref(prior, "prior")?.0, gamma, signal)?;
        Ok(())
    })
}

/// Builds the ironed virtual value of the posterior for `signal`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_virtual_new(
    prior: *const HmPrior,
    gamma: f64,
    signal: f64,
    grid_size: usize,
    out_virtual: *mut *mut HmVirtual,
) -> HmStatus {
    guard(|| {
        let slot = out(out_virtual, "out_virtual")?;
        let psi = ironed_virtual(&deref(prior, "prior")?.0, gamma, signal, grid_size)?;
        *slot = Box::into_raw(Box::new(HmVirtual(psi)));
        Ok(())
    })
}

/// Releases a virtual-value handle; null is ignored.
///
/// # Safety
/// `psi` must come from [`hm_virtual_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hm_virtual_free(psi: *mut HmVirtual) {
    if !psi.is_null() {
        drop(Box::from_raw(psi));
    }
}

/// Ironed virtual value at `v`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_virtual_eval(psi: *const HmVirtual, v: f64, result: *mut f64) -> HmStatus {
    guard(|| {
        *out(result, "result")? = deref(psi, "psi")?.0.eval(v);
        Ok(())
    })
}

/// Smallest value whose ironed virtual value reaches `z`; `+inf` if none.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_virtual_pseudo_inverse(psi: *const HmVirtual, z: f64, result: *mut f64) -> HmStatus {
    guard(|| {
        *out(result, "result")? = deref(psi, "psi")?.0.pseudo_inverse(z);
        Ok(())
    })
}

/// The threshold `T` stored in the handle.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_virtual_threshold(psi: *const HmVirtual, result: *mut f64) -> HmStatus {
    guard(|| {
        *out(result, "result")? = deref(psi, "psi")?.0.threshold();
        Ok(())
    })
}

/// Optimal posted price and its regime. Priors outside the regime theory
/// fall back to a grid search and report `HM_REGIME_UNCLASSIFIED`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hm_optimal_price(
    prior: *const HmPrior,
    gamma: f64,
    signal: f64,
    grid_size: usize,
    price: *mut f64,
    regime: *mut HmRegime,
) -> HmStatus {
    guard(|| {
        let p = &deref(prior, "prior")?.0;
        let price = out(price, "price")?;
        let regime = out(regime, "regime")?;
        let (pr, rg) = match thresholds(p, gamma, grid_size) {
            Ok(th) => optimal_price(&th, signal),
            Err(Error::NotRegular { .. }) | Err(Error::NotLogConcave { .. }) => {
                (brute_force_price(p, gamma, signal, grid_size)?.0, Regime::Unclassified)
            }
            Err(e) => return Err(e.into()),
        };
        *price = pr;
        *regime = match rg {
            Regime::Ignore => HmRegime::Ignore,
            Regime::Follow => HmRegime::Follow,
            Regime::Cap => HmRegime::Cap,
            Regime::FollowAgain => HmRegime::FollowAgain,
            Regime::Unclassified => HmRegime::Unclassified,
        };
        Ok(())
    })
}

/// Runs an eager second-price auction. `winner` is -1 when nothing sells.
///
/// # Safety
/// `values` and `reserves` must point to `n` doubles; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn hm_eager_run(
    values: *const f64,
    reserves: *const f64,
    n: usize,
    winner: *mut i64,
    payment: *mut f64,
) -> HmStatus {
    guard(|| {
        if values.is_null() {
            return Err(Failure::Null("values"));
        }
        if reserves.is_null() {
            return Err(Failure::Null("reserves"));
        }
        let winner = out(winner, "winner")?;
        let payment = out(payment, "payment")?;
        let o = eager_run(std::slice::from_raw_parts(values, n), std::slice::from_raw_parts(reserves, n))?;
        *winner = o.winner.map_or(-1, |w| w as i64);
        *payment = o.payment;
        Ok(())
    })
}

/// Expected two-buyer eager revenue given both signals.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn hm_exact_two_buyer_revenue(
    prior: *const HmPrior,
    gamma: f64,
    signal_1: f64,
    signal_2: f64,
    policy: HmPolicy,
    k: usize,
    grid_size: usize,
    result: *mut f64,
) -> HmStatus {
    guard(|| {
        let p = &deref(prior, "prior")?.0;
        let result = out(result, "result")?;
        let policy = match policy {
            HmPolicy::SpaIgnore => ReservePolicy::SpaIgnore,
            HmPolicy::SignalEager => ReservePolicy::SignalEager,
            HmPolicy::KUncapped => ReservePolicy::KUncapped(k),
        };
        *result = ExactTwoBuyer::new(p, gamma, grid_size)?.revenue((signal_1, signal_2), policy)?;
        Ok(())
    })
}

/// Revenue of the full-surplus mechanism for the two-point prior.
///
/// # Safety
/// `revenue` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hm_full_surplus_revenue(alpha: f64, gamma: f64, epsilon: f64, revenue: *mut f64) -> HmStatus {
    guard(|| {
        *out(revenue, "revenue")? = full_surplus_demo(alpha, gamma, epsilon)?.revenue;
        Ok(())
    })
}
