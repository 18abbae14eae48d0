//! C ABI for `codedlat`.
//!
//! Every fallible function returns a [`CdlStatus`] and writes results through
//! out-pointers. On failure a message is available from
//! [`cdl_last_error_message`] on the same thread. Panics never cross the
//! boundary; they surface as `CDL_STATUS_PANIC`.
//!
//! Retransmission caps are passed as `u32` with `0` meaning unlimited.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use codedlat::analytic::{bounds_general_k, bounds_max_k, harmonic, shared_order_stat_means};
use codedlat::reliability::{system_success_prob, CensoredRuntimes, LatencyQuantile};
use codedlat::{Error, ParamsDocument, SystemParams, TransmissionCap};

/// Cap value meaning "no retransmission limit".
pub const CDL_UNLIMITED: u32 = 0;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdlStatus {
    Ok = 0,
    NullPointer = 1,
    /// A parameter is out of range or malformed.
    InvalidArgument = 2,
    Divisibility = 3,
    Precondition = 4,
    /// The requested quantile does not exist under the cap.
    Infeasible = 5,
    Internal = 6,
    Panic = 7,
}

/// Opaque parameter handle.
pub struct CdlParams {
    inner: SystemParams,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CdlBounds {
    pub lower: f64,
    pub upper: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CdlEstimate {
    pub mean: f64,
    pub std_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CdlStatus {
    match err {
        Error::Range { .. } | Error::Json(_) => CdlStatus::InvalidArgument,
        Error::Divisibility { .. } => CdlStatus::Divisibility,
        Error::Precondition(_) => CdlStatus::Precondition,
        _ => CdlStatus::Internal,
    }
}

struct Failure(CdlStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CdlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CdlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            CdlStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(CdlStatus::NullPointer, format!("{name} is null"))
}

unsafe fn params<'a>(p: *const CdlParams) -> Result<&'a SystemParams, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null("params"))
}

unsafe fn write<T>(out: *mut T, name: &str, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn cap(gamma: u32) -> TransmissionCap {
    if gamma == CDL_UNLIMITED {
        TransmissionCap::Unlimited
    } else {
        TransmissionCap::Limited(gamma)
    }
}

/// Message for the last failure on this thread, or null if none. Valid
/// until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cdl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn cdl_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn cdl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates and allocates a parameter handle. Free it with
/// [`cdl_params_free`].
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn cdl_params_new(
    n: usize,
    k: usize,
    m: usize,
    mu1: f64,
    mu2: f64,
    epsilon: f64,
    out: *mut *mut CdlParams,
) -> CdlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = SystemParams::new(n, k, m, mu1, mu2, epsilon)?;
        out.write(Box::into_raw(Box::new(CdlParams { inner })));
        Ok(())
    })
}

/// Parses a JSON parameter document (`n, k, m, mu1, mu2, epsilon`; optional
/// policy keys are accepted and ignored here).
///
/// # Safety
/// `json` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cdl_params_from_json(
    json: *const c_char,
    out: *mut *mut CdlParams,
) -> CdlStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| {
            Failure(
                CdlStatus::InvalidArgument,
                format!("json is not UTF-8: {e}"),
            )
        })?;
        let inner = ParamsDocument::from_json(text)?.system()?;
        out.write(Box::into_raw(Box::new(CdlParams { inner })));
        Ok(())
    })
}

/// # Safety
/// `p` must come from this library and not have been freed; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn cdl_params_free(p: *mut CdlParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Exact expected run-time from the Markov chain; requires `k = m`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cdl_expected_runtime_exact(
    p: *const CdlParams,
    out: *mut f64,
) -> CdlStatus {
    guard(|| {
        let v = codedlat::ctmc::expected_runtime(params(p)?)?;
        write(out, "out", v)
    })
}

/// Lower and upper bounds on the expected run-time.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cdl_bounds(p: *const CdlParams, out: *mut CdlBounds) -> CdlStatus {
    guard(|| {
        let p = params(p)?;
        let b = if p.k == p.m {
            bounds_max_k(p)?
        } else {
            bounds_general_k(p)?
        };
        write(
            out,
            "out",
            CdlBounds {
                lower: b.lower,
                upper: b.upper,
            },
        )
    })
}

/// Per-worker delivery probability `p` and system success probability
/// `P_s` under cap `gamma`.
///
/// # Safety
/// Pointers must be valid; either out-pointer may be null to skip it.
#[no_mangle]
pub unsafe extern "C" fn cdl_success_probability(
    p: *const CdlParams,
    gamma: u32,
    out_worker: *mut f64,
    out_system: *mut f64,
) -> CdlStatus {
    guard(|| {
        let prof = system_success_prob(params(p)?, cap(gamma));
        if let Some(w) = out_worker.as_mut() {
            *w = prof.p;
        }
        if let Some(s) = out_system.as_mut() {
            *s = prof.p_s;
        }
        Ok(())
    })
}

/// Monte Carlo estimate of the expected run-time.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cdl_estimate_runtime(
    p: *const CdlParams,
    trials: u64,
    seed: u64,
    out: *mut CdlEstimate,
) -> CdlStatus {
    guard(|| {
        let e = codedlat::montecarlo::estimate_expected_runtime(params(p)?, trials, seed)?;
        write(
            out,
            "out",
            CdlEstimate {
                mean: e.mean,
                std_error: e.std_error,
            },
        )
    })
}

/// Monte Carlo estimate of `Pr[T′ ≤ tau]` under cap `gamma`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cdl_runtime_cdf(
    p: *const CdlParams,
    gamma: u32,
    tau: f64,
    trials: u64,
    seed: u64,
    out: *mut CdlEstimate,
) -> CdlStatus {
    guard(|| {
        let e = codedlat::reliability::runtime_cdf(params(p)?, cap(gamma), tau, trials, seed)?;
        write(
            out,
            "out",
            CdlEstimate {
                mean: e.mean,
                std_error: e.std_error,
            },
        )
    })
}

/// Empirical latency quantile `T^(alpha)` under cap `gamma`. Returns
/// `CDL_STATUS_INFEASIBLE` when too few trials finish.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn cdl_latency_quantile(
    p: *const CdlParams,
    gamma: u32,
    alpha: f64,
    trials: u64,
    seed: u64,
    out: *mut f64,
) -> CdlStatus {
    guard(|| {
        let c = cap(gamma);
        let sim = CensoredRuntimes::simulate(params(p)?, &[c], trials, seed)?;
        match sim.quantile(c, alpha)? {
            LatencyQuantile::Feasible { value, .. } => write(out, "out", value),
            LatencyQuantile::Infeasible { success_fraction } => Err(Failure(
                CdlStatus::Infeasible,
                format!(
                    "only {success_fraction} of trials finish, below 1 - alpha = {}",
                    1.0 - alpha
                ),
            )),
        }
    })
}

/// Erasure probability of the shorter packets of the uncoded baseline.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cdl_uncoded_erasure(
    epsilon: f64,
    k: usize,
    n: usize,
    out: *mut f64,
) -> CdlStatus {
    guard(|| {
        let v = codedlat::model::uncoded_erasure(epsilon, k, n)?;
        write(out, "out", v)
    })
}

/// Harmonic number `H_n` (`H_0 = 0`).
#[no_mangle]
pub extern "C" fn cdl_harmonic(n: usize) -> f64 {
    harmonic(n)
}

/// Expected order statistics of `n` i.i.d. unit-rate Erlang(`shape`)
/// variables, smallest first, written to `buf[0..n]`.
///
/// # Safety
/// `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn cdl_erlang_order_stat_means(
    n: usize,
    shape: usize,
    buf: *mut f64,
    len: usize,
) -> CdlStatus {
    guard(|| {
        if buf.is_null() {
            return Err(null("buf"));
        }
        if n == 0 || shape == 0 {
            return Err(Failure(
                CdlStatus::InvalidArgument,
                "n and shape must be positive".into(),
            ));
        }
        if len < n {
            return Err(Failure(
                CdlStatus::InvalidArgument,
                format!("buffer holds {len} values, need {n}"),
            ));
        }
        let table = shared_order_stat_means(n, shape);
        std::slice::from_raw_parts_mut(buf, n).copy_from_slice(&table.means);
        Ok(())
    })
}
