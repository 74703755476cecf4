//! C interface to `queuechan`.
//!
//! Every fallible function returns `QC_OK` (0) or the positive error code of the failure and
//! writes its result through an out-pointer. The message of the most recent failure on the
//! calling thread is available from [`qc_last_error_message`]. Objects are opaque handles
//! released with their matching `*_free` function; strings returned by the library are
//! released with [`qc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clap::ValueEnum;
use queuechan::analytic::{
    capacity, k_coefficients_geo_g1, solve_sigma, stationary_from_k, stationary_g_geo1,
};
use queuechan::cli::{evaluate, Command};
use queuechan::dist::{ParametricDist, DEFAULT_TAIL_EPS};
use queuechan::noise::NoiseModel;
use queuechan::Error;

pub const QC_OK: i32 = 0;
pub const QC_ERR_INVALID_DISTRIBUTION: i32 = 1;
pub const QC_ERR_INVALID_PARAMETER: i32 = 2;
pub const QC_ERR_STABILITY_VIOLATION: i32 = 3;
pub const QC_ERR_NO_BRACKET: i32 = 4;
pub const QC_ERR_ASSUMPTION_VIOLATION: i32 = 5;
pub const QC_ERR_RECURSION_UNSTABLE: i32 = 6;
pub const QC_ERR_CONVENTION: i32 = 7;
pub const QC_ERR_INTEGRALITY: i32 = 8;
pub const QC_ERR_MEAN_MISMATCH: i32 = 9;
pub const QC_ERR_INCONSISTENT_TIMESTAMPS: i32 = 10;
pub const QC_ERR_DEGENERATE_NOISE: i32 = 11;
pub const QC_ERR_RUNAWAY_QUEUE: i32 = 12;
pub const QC_ERR_INFEASIBLE: i32 = 13;
pub const QC_ERR_CONFIG: i32 = 14;
pub const QC_ERR_IO: i32 = 15;
/// A required pointer argument was null or a string was not valid UTF-8.
pub const QC_ERR_NULL_OR_UTF8: i32 = 100;
/// A Rust panic was caught at the boundary.
pub const QC_ERR_PANIC: i32 = 101;

/// Opaque noise model.
pub struct QcNoiseModel(NoiseModel);

/// Opaque discrete distribution on the positive integers.
pub struct QcDist(ParametricDist);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> i32 {
    set_last_error(e.to_string());
    e.code()
}

fn guard(f: impl FnOnce() -> Result<(), i32>) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QC_OK,
        Ok(Err(code)) => code,
        Err(_) => {
            set_last_error("internal panic".into());
            QC_ERR_PANIC
        }
    }
}

fn null_arg(name: &str) -> i32 {
    set_last_error(format!("argument `{name}` is null"));
    QC_ERR_NULL_OR_UTF8
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, i32> {
    if p.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_last_error(format!("argument `{name}` is not valid UTF-8"));
        QC_ERR_NULL_OR_UTF8
    })
}

unsafe fn write_out<T>(out: *mut T, v: T, name: &str) -> Result<(), i32> {
    if out.is_null() {
        return Err(null_arg(name));
    }
    out.write(v);
    Ok(())
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, i32> {
    p.as_ref().ok_or_else(|| null_arg(name))
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, i32> {
    serde_json::from_str(text).map_err(|e| fail(Error::Config(e.to_string())))
}

/// Message of the last failure on this thread, or null. Valid until the next failing call on
/// the same thread; do not free.
#[no_mangle]
pub extern "C" fn qc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a noise model from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_noise_from_json(
    json: *const c_char,
    out: *mut *mut QcNoiseModel,
) -> i32 {
    guard(|| {
        let nm: NoiseModel = from_json(read_str(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(QcNoiseModel(nm))), "out")
    })
}

/// Binary symmetric noise with flip probability `p_low` for queue lengths up to `b` and
/// `p_high` above.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_noise_binary_flip(
    b: usize,
    p_low: f64,
    p_high: f64,
    out: *mut *mut QcNoiseModel,
) -> i32 {
    guard(|| {
        let nm = NoiseModel::binary_flip(b, p_low, p_high).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(QcNoiseModel(nm))), "out")
    })
}

/// # Safety
/// `nm` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qc_noise_free(nm: *mut QcNoiseModel) {
    if !nm.is_null() {
        drop(Box::from_raw(nm));
    }
}

/// Parses a distribution from its JSON form, e.g. `{"kind":"geometric","rate":0.3}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_dist_from_json(json: *const c_char, out: *mut *mut QcDist) -> i32 {
    guard(|| {
        let d: ParametricDist = from_json(read_str(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(QcDist(d))), "out")
    })
}

/// Geometric law on `{1, 2, ...}` with success probability `rate`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_dist_geometric(rate: f64, out: *mut *mut QcDist) -> i32 {
    guard(|| {
        let d = ParametricDist::geometric(rate).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(QcDist(d))), "out")
    })
}

/// Point mass at `value`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_dist_deterministic(value: u64, out: *mut *mut QcDist) -> i32 {
    guard(|| {
        let d = ParametricDist::deterministic(value).map_err(fail)?;
        write_out(out, Box::into_raw(Box::new(QcDist(d))), "out")
    })
}

/// # Safety
/// `d` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_dist_mean(d: *const QcDist, out: *mut f64) -> i32 {
    guard(|| write_out(out, deref(d, "d")?.0.mean(), "out"))
}

/// # Safety
/// `d` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qc_dist_free(d: *mut QcDist) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Fixed point of the arrival curve for inter-arrival law `arrival` and geometric service
/// rate `mu`.
///
/// # Safety
/// `arrival` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_solve_sigma(arrival: *const QcDist, mu: f64, out: *mut f64) -> i32 {
    guard(|| {
        let s = solve_sigma(&deref(arrival, "arrival")?.0, mu).map_err(fail)?;
        write_out(out, s, "out")
    })
}

/// Capacity in bits per slot of the queue with inter-arrival law `arrival` and geometric
/// service rate `mu`, truncating the queue-length law at `q_max`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_capacity_g_geo1(
    arrival: *const QcDist,
    mu: f64,
    noise: *const QcNoiseModel,
    q_max: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let arrival = &deref(arrival, "arrival")?.0;
        let nm = &deref(noise, "noise")?.0;
        let pi = stationary_g_geo1(arrival, mu, q_max).map_err(fail)?;
        let c = capacity(1.0 / arrival.mean(), &pi, nm);
        write_out(out, c.capacity_bits_per_slot, "out")
    })
}

/// Capacity in bits per slot of the queue with Bernoulli(`lambda`) arrivals and general
/// service law `service`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qc_capacity_geo_g1(
    lambda: f64,
    service: *const QcDist,
    noise: *const QcNoiseModel,
    q_max: usize,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let service = &deref(service, "service")?.0;
        let nm = &deref(noise, "noise")?.0;
        let k = k_coefficients_geo_g1(lambda, service, q_max, DEFAULT_TAIL_EPS).map_err(fail)?;
        let pi = stationary_from_k(&k, lambda, 1.0 / service.mean(), q_max).map_err(fail)?;
        write_out(out, capacity(lambda, &pi, nm).capacity_bits_per_slot, "out")
    })
}

/// Runs a named command (`capacity`, `sweep`, `sigma`, `stationary`, `simulate`,
/// `infodensity`, `codeexp`, `extremal`, `bounds`) on a JSON configuration, as the CLI does,
/// and writes the JSON result to `*out_json`. Stochastic commands need `sim.seed` in the
/// configuration. `*ok` is set to 0 when a per-point error or assertion failed, else 1.
///
/// # Safety
/// Strings must be NUL-terminated; `out_json` and `ok` must be writable. Free `*out_json`
/// with [`qc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn qc_run_json(
    command: *const c_char,
    config_json: *const c_char,
    out_json: *mut *mut c_char,
    ok: *mut i32,
) -> i32 {
    guard(|| {
        let name = read_str(command, "command")?;
        let cmd = Command::from_str(name, true)
            .map_err(|_| fail(Error::Config(format!("unknown command `{name}`"))))?;
        let cfg: serde_json::Value = from_json(read_str(config_json, "config_json")?)?;
        let (value, passed) = evaluate(cmd, cfg).map_err(fail)?;
        let text = CString::new(value.to_string()).expect("JSON has no interior NUL");
        if ok.is_null() {
            return Err(null_arg("ok"));
        }
        write_out(out_json, text.into_raw(), "out_json")?;
        ok.write(passed as i32);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_message_is_set() {
        let mut d = ptr::null_mut();
        let rc = unsafe { qc_dist_geometric(1.5, &mut d) };
        assert_eq!(rc, QC_ERR_INVALID_DISTRIBUTION);
        assert!(d.is_null());
        let msg = unsafe { CStr::from_ptr(qc_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("1.5"));
    }

    #[test]
    fn codes_match_core() {
        let cases = [
            (
                Error::InvalidDistribution(String::new()),
                QC_ERR_INVALID_DISTRIBUTION,
            ),
            (Error::NoBracket, QC_ERR_NO_BRACKET),
            (Error::IntegralityError(2.5), QC_ERR_INTEGRALITY),
            (Error::Config(String::new()), QC_ERR_CONFIG),
            (Error::Io(String::new()), QC_ERR_IO),
        ];
        for (e, c) in cases {
            assert_eq!(e.code(), c);
        }
    }

    #[test]
    fn null_pointers_are_rejected() {
        assert_eq!(
            unsafe { qc_dist_geometric(0.5, ptr::null_mut()) },
            QC_ERR_NULL_OR_UTF8
        );
        let mut s = 0.0;
        assert_eq!(
            unsafe { qc_solve_sigma(ptr::null(), 0.5, &mut s) },
            QC_ERR_NULL_OR_UTF8
        );
    }
}
