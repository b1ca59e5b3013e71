//! C interface to `boundstate`.
//!
//! Objects cross the boundary as opaque handles created by `bs_*_new` /
//! `bs_shoot` and released by the matching `bs_*_free`. Every fallible call
//! returns a [`BsStatus`]; on failure `bs_last_error_message` describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use boundstate::potential::{hls_functional, newton_potential_radial, KernelSpec};
use boundstate::shooting::Component;
use boundstate::verify::{run_criterion, VerifyOptions, PROPERTY_CASES};
use boundstate::{bubble_residual, classify, validate_config, BubbleParams, Error, ExponentConfig, RadialGrid};
use boundstate::{RadialProfilePair, ShootInput, ShootKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    InvalidArgument = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsShootKind {
    BoundState = 0,
    PositivityFailureU = 1,
    PositivityFailureV = 2,
    NoDecay = 3,
}

/// Validated exponent triple (n, alpha, beta).
pub struct BsConfig(ExponentConfig);

/// Classified shooting result with its sampled profile.
pub struct BsProfile {
    kind: BsShootKind,
    event_r: f64,
    crossing: Option<f64>,
    profile: RadialProfilePair,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> BsStatus {
    match err {
        Error::DimensionTooSmall(_)
        | Error::CriticalityViolated { .. }
        | Error::ExponentOutOfRange { .. }
        | Error::InfeasibleHypothesis(_)
        | Error::HypothesisNotApplicable { .. } => BsStatus::InvalidConfig,
        Error::Io(_) => BsStatus::Io,
        e if e.is_numerical() => BsStatus::Numerical,
        _ => BsStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), BsStatus>) -> BsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BsStatus::Ok,
        Ok(Err(s)) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            BsStatus::Panic
        }
    }
}

fn check<T>(r: boundstate::Result<T>) -> Result<T, BsStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), BsStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(BsStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// # Safety
/// `p` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], BsStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the last failing call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn bs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to a `BsConfig *` slot.
#[no_mangle]
pub unsafe extern "C" fn bs_config_new(n: usize, alpha: f64, beta: f64, out: *mut *mut BsConfig) -> BsStatus {
    guard(|| {
        non_null(out, "out")?;
        let config = check(validate_config(n, alpha, beta))?;
        *out = Box::into_raw(Box::new(BsConfig(config)));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from [`bs_config_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_config_free(config: *mut BsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Critical exponent (n+2)/(n-2) of the configuration.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bs_config_critical_exponent(config: *const BsConfig) -> f64 {
    config.as_ref().map_or(f64::NAN, |c| c.0.critical_exponent())
}

/// Bubble with scale `t` centred at the origin, evaluated at radius `r`.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_bubble_radial(config: *const BsConfig, t: f64, r: f64, out: *mut f64) -> BsStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        let b = check(BubbleParams::centered(&(*config).0, t))?;
        if !(r >= 0.0 && r.is_finite()) {
            set_error(format!("radius must be finite and nonnegative (got {r})"));
            return Err(BsStatus::InvalidArgument);
        }
        *out = b.at_squared_radius(r * r);
        Ok(())
    })
}

/// Finite-difference residual of the bubble on the default radial grid.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_bubble_residual(config: *const BsConfig, t: f64, out: *mut f64) -> BsStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        let b = check(BubbleParams::centered(&(*config).0, t))?;
        let grid = check(boundstate::config::RunConfig::default().radial_grid())?;
        *out = check(bubble_residual(&b, &(*config).0, &grid))?;
        Ok(())
    })
}

/// Integrates from (u0, v0) to `r_max` (pass 0 for the default) and classifies.
///
/// # Safety
/// `config` must be a live handle and `out` a writable `BsProfile *` slot.
#[no_mangle]
pub unsafe extern "C" fn bs_shoot(
    config: *const BsConfig,
    u0: f64,
    v0: f64,
    r_max: f64,
    out: *mut *mut BsProfile,
) -> BsStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        let mut input = check(ShootInput::new((*config).0, u0, v0))?;
        if r_max != 0.0 {
            input = check(input.with_r_max(r_max))?;
        }
        let outcome = check(classify(&input))?;
        let (kind, event_r) = match outcome.kind {
            ShootKind::BoundState => (BsShootKind::BoundState, f64::NAN),
            ShootKind::PositivityFailure { which: Component::U, at_r } => (BsShootKind::PositivityFailureU, at_r),
            ShootKind::PositivityFailure { which: Component::V, at_r } => (BsShootKind::PositivityFailureV, at_r),
            ShootKind::NoDecay { at_r } => (BsShootKind::NoDecay, at_r),
        };
        *out = Box::into_raw(Box::new(BsProfile {
            kind,
            event_r,
            crossing: outcome.crossing,
            profile: outcome.profile,
        }));
        Ok(())
    })
}

/// # Safety
/// `profile` must be null or a handle from [`bs_shoot`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bs_profile_free(profile: *mut BsProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// # Safety
/// `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bs_profile_kind(profile: *const BsProfile) -> BsShootKind {
    (*profile).kind
}

/// Radius of the vanishing or decay failure; NaN for a bound state.
///
/// # Safety
/// `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bs_profile_event_radius(profile: *const BsProfile) -> f64 {
    (*profile).event_r
}

/// First radius where v - u changes sign; NaN if none.
///
/// # Safety
/// `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bs_profile_crossing(profile: *const BsProfile) -> f64 {
    (*profile).crossing.unwrap_or(f64::NAN)
}

/// # Safety
/// `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bs_profile_len(profile: *const BsProfile) -> usize {
    (*profile).profile.grid.len()
}

/// Copies the first `len` samples into `r`, `u`, `v`. Any of the output
/// pointers may be null to skip that column.
///
/// # Safety
/// `profile` must be a live handle; non-null outputs must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bs_profile_copy(
    profile: *const BsProfile,
    r: *mut f64,
    u: *mut f64,
    v: *mut f64,
    len: usize,
) -> BsStatus {
    guard(|| {
        non_null(profile, "profile")?;
        let p = &(*profile).profile;
        if len > p.grid.len() {
            set_error(format!("requested {len} samples, profile has {}", p.grid.len()));
            return Err(BsStatus::InvalidArgument);
        }
        for (dst, src) in [(r, p.grid.nodes()), (u, &p.u[..]), (v, &p.v[..])] {
            if !dst.is_null() {
                ptr::copy_nonoverlapping(src.as_ptr(), dst, len);
            }
        }
        Ok(())
    })
}

/// Newtonian potential in dimension `n` of the radial source `f` sampled at the
/// increasing radii `r`; writes `len` values into `out`.
///
/// # Safety
/// `r`, `f` and `out` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bs_newton_potential(
    n: usize,
    r: *const f64,
    f: *const f64,
    len: usize,
    out: *mut f64,
) -> BsStatus {
    guard(|| {
        let r = slice(r, len, "r")?;
        let f = slice(f, len, "f")?;
        non_null(out, "out")?;
        let grid = check(RadialGrid::new(r.to_vec()))?;
        let u = check(newton_potential_radial(f, &grid, n))?;
        ptr::copy_nonoverlapping(u.as_ptr(), out, len);
        Ok(())
    })
}

/// HLS ratio J(f, f) / (|f|_r |f|_s) for f the critical power of the bubble
/// with scale `t`.
///
/// # Safety
/// `config` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bs_hls_bubble_ratio(
    config: *const BsConfig,
    lambda: f64,
    r_exp: f64,
    s_exp: f64,
    t: f64,
    out: *mut f64,
) -> BsStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        let config = &(*config).0;
        let grid = check(boundstate::config::RunConfig::default().radial_grid())?;
        let b = check(BubbleParams::centered(config, t))?;
        let p = config.critical_exponent();
        let f: Vec<f64> = grid.nodes().iter().map(|&r| b.at_squared_radius(r * r).powf(p)).collect();
        let kernel = check(KernelSpec::new(config.n(), lambda))?;
        *out = check(hls_functional(&f, &f, &grid, &kernel, r_exp, s_exp))?;
        Ok(())
    })
}

/// Runs acceptance criterion `id` (1 to 12) and stores 1/0 in `passed`.
///
/// # Safety
/// `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bs_verify_criterion(id: u32, seed: u64, passed: *mut i32) -> BsStatus {
    guard(|| {
        non_null(passed, "passed")?;
        let opts = VerifyOptions {
            seed,
            property_cases: PROPERTY_CASES,
        };
        let report = check(run_criterion(id, &opts))?;
        if !report.passed {
            set_error(report.detail);
        }
        *passed = report.passed as i32;
        Ok(())
    })
}
