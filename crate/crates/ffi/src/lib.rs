//! C interface to the freefield verification suites.
//!
//! Objects cross the boundary as opaque handles created and destroyed by
//! matching `*_new`/`*_free` calls. Every fallible function returns an
//! [`FfStatus`]; on failure a message is available from [`ff_last_error`]
//! until the next failing call on the same thread. Strings handed out are
//! owned by the caller and released with [`ff_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use freefield::cli::{run_suites, RunOutcome, SuiteConfig, SuiteName, Trials};
use freefield::dressing::{default_density_grid, DensityCurve};
use freefield::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    /// A run completed and at least one check failed.
    CheckFailed = 1,
    Config = 2,
    Input = 3,
    NullPointer = 4,
    Degenerate = 5,
    /// Quadrature, fit or identity failure raised as an error.
    Numerical = 6,
    Io = 7,
    Panic = 8,
}

/// Suite configuration.
pub struct FfConfig(SuiteConfig);

/// Result of a verification run: the report document and its CSV artifacts.
pub struct FfRun(RunOutcome);

/// Sampled single-measurement density.
pub struct FfDensity(DensityCurve);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> FfStatus {
    match err {
        Error::Config(_) => FfStatus::Config,
        Error::Input(_) | Error::Species { .. } | Error::ModeMismatch | Error::Statistics(_) | Error::Cutoff { .. } => {
            FfStatus::Input
        }
        Error::Degenerate(_) | Error::Presentation(_) => FfStatus::Degenerate,
        Error::Io(_) | Error::Json(_) => FfStatus::Io,
        _ => FfStatus::Numerical,
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<FfStatus, (FfStatus, String)>) -> FfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside freefield");
            FfStatus::Panic
        }
    }
}

fn fail(err: Error) -> (FfStatus, String) {
    (status_of(&err), err.to_string())
}

fn null() -> (FfStatus, String) {
    (FfStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (FfStatus, String)> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (FfStatus::Input, "string is not valid UTF-8".into()))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<FfStatus, (FfStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    let c = CString::new(s).map_err(|_| (FfStatus::Input, "output contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(FfStatus::Ok)
}

/// Message of the last failing call on this thread, or null. Valid until the
/// next failing call; do not free.
#[no_mangle]
pub extern "C" fn ff_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---------------------------------------------------------------------------
// configuration

/// Default configuration: every suite except the width scan.
#[no_mangle]
pub extern "C" fn ff_config_new() -> *mut FfConfig {
    Box::into_raw(Box::new(FfConfig(SuiteConfig::default())))
}

/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_config_from_json(json: *const c_char, out: *mut *mut FfConfig) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let config = SuiteConfig::from_json(read_str(json)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(FfConfig(config)));
        Ok(FfStatus::Ok)
    })
}

/// # Safety
/// `config` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_config_free(config: *mut FfConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

unsafe fn with_config(config: *mut FfConfig, f: impl FnOnce(&mut SuiteConfig) -> Result<(), Error>) -> FfStatus {
    guard(|| {
        let c = config.as_mut().ok_or_else(null)?;
        f(&mut c.0).map_err(fail)?;
        Ok(FfStatus::Ok)
    })
}

/// Replaces the suite selection with a comma-separated list of names.
///
/// # Safety
/// `config` must be a live handle and `names` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ff_config_set_suites(config: *mut FfConfig, names: *const c_char) -> FfStatus {
    let names = match read_str(names) {
        Ok(s) => s.to_string(),
        Err((s, msg)) => {
            set_error(msg);
            return s;
        }
    };
    with_config(config, |c| {
        c.suites = names.split(',').map(|s| s.trim().parse::<SuiteName>()).collect::<Result<_, _>>()?;
        c.validate()
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_config_set_seed(config: *mut FfConfig, seed: u64) -> FfStatus {
    with_config(config, |c| {
        c.seed = seed;
        Ok(())
    })
}

/// Uses `trials` for every suite.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_config_set_trials(config: *mut FfConfig, trials: usize) -> FfStatus {
    with_config(config, |c| {
        c.trials = Trials::Uniform(trials);
        c.validate()
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_config_set_mass(config: *mut FfConfig, mass: f64) -> FfStatus {
    with_config(config, |c| {
        c.mass = mass;
        c.validate()
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_config_set_quad_order(config: *mut FfConfig, order: usize) -> FfStatus {
    with_config(config, |c| {
        c.quad_order = order;
        c.validate()
    })
}

/// Caps every check tolerance at `tol`.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_config_set_rel_tol(config: *mut FfConfig, tol: f64) -> FfStatus {
    with_config(config, |c| {
        c.rel_tol = Some(tol);
        c.validate()
    })
}

/// The configuration as JSON.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_config_to_json(config: *const FfConfig, out: *mut *mut c_char) -> FfStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(null)?;
        write_string(out, serde_json::to_string_pretty(&c.0).map_err(|e| fail(e.into()))?)
    })
}

// ---------------------------------------------------------------------------
// runs

/// Runs the configured suites. Returns `FF_STATUS_OK` when every check
/// passes and `FF_STATUS_CHECK_FAILED` when one does; `*out` is set in both
/// cases and must be released with [`ff_run_free`].
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_run(config: *const FfConfig, out: *mut *mut FfRun) -> FfStatus {
    guard(|| {
        let c = config.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        let outcome = run_suites(&c.0).map_err(fail)?;
        let status = if outcome.passed() { FfStatus::Ok } else { FfStatus::CheckFailed };
        *out = Box::into_raw(Box::new(FfRun(outcome)));
        Ok(status)
    })
}

/// # Safety
/// `run` must be null or a handle from [`ff_run`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_run_free(run: *mut FfRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// 1 when every check passed, 0 otherwise (including a null handle).
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_run_passed(run: *const FfRun) -> i32 {
    run.as_ref().map_or(0, |r| r.0.passed() as i32)
}

/// Total number of checks over all suites.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_run_check_count(run: *const FfRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.document.suites.iter().map(|s| s.checks.len()).sum())
}

/// Number of failing checks.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_run_failure_count(run: *const FfRun) -> usize {
    run.as_ref().map_or(0, |r| {
        r.0.document.suites.iter().flat_map(|s| &s.checks).filter(|c| !c.pass).count()
    })
}

/// The report document, byte-identical to `report.json`.
///
/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_run_report_json(run: *const FfRun, out: *mut *mut c_char) -> FfStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(null)?;
        write_string(out, r.0.document.to_json().map_err(fail)?)
    })
}

/// Writes `report.json` and the CSV artifacts into `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` a nul-terminated path.
#[no_mangle]
pub unsafe extern "C" fn ff_run_write(run: *const FfRun, dir: *const c_char) -> FfStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(null)?;
        r.0.write(Path::new(read_str(dir)?)).map_err(fail)?;
        Ok(FfStatus::Ok)
    })
}

// ---------------------------------------------------------------------------
// densities

/// Density for `(U,U) = s` with forward-shell part `s_plus`, on the default
/// 401-point grid.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_density_new(s: f64, s_plus: f64, out: *mut *mut FfDensity) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let curve = DensityCurve::from_parameters(s, s_plus, s - s_plus, &default_density_grid(s)).map_err(fail)?;
        *out = Box::into_raw(Box::new(FfDensity(curve)));
        Ok(FfStatus::Ok)
    })
}

/// # Safety
/// `d` must be null or a handle from [`ff_density_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_density_free(d: *mut FfDensity) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// ρ(v); NaN for a null handle.
///
/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_density_rho(d: *const FfDensity, v: f64) -> f64 {
    d.as_ref().map_or(f64::NAN, |d| d.0.rho(v))
}

/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_density_len(d: *const FfDensity) -> usize {
    d.as_ref().map_or(0, |d| d.0.samples.len())
}

/// Grid point `i` and its density.
///
/// # Safety
/// `d` must be a live handle; `v` and `rho` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ff_density_sample(d: *const FfDensity, i: usize, v: *mut f64, rho: *mut f64) -> FfStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(null)?;
        if v.is_null() || rho.is_null() {
            return Err(null());
        }
        let &(x, y) = d
            .0
            .samples
            .get(i)
            .ok_or_else(|| (FfStatus::Input, format!("sample {i} out of range")))?;
        *v = x;
        *rho = y;
        Ok(FfStatus::Ok)
    })
}

/// # Safety
/// `d` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ff_density_csv(d: *const FfDensity, out: *mut *mut c_char) -> FfStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(null)?;
        write_string(out, d.0.to_csv())
    })
}
