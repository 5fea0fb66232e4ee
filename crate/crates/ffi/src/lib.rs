//! C ABI over the planner and simulator.
//!
//! Objects cross the boundary as opaque handles created by a `*_default`,
//! `*_load` or `*_from_json` function and released by the matching `*_free`.
//! Every fallible call returns a [`ReStatus`]; on failure the message is
//! available from [`re_last_error`] on the same thread. Strings handed out by
//! the library must be released with [`re_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use riskethics::simulator::RunStatus;
use riskethics::{Error, PlannerConfig, Profile, Scenario, SimulationLog};

/// Result of a fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON or a document that does not match the schema.
    Parse = 3,
    /// A value violates a documented invariant.
    Validation = 4,
    Io = 5,
    PlannerFault = 6,
    OutOfRange = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

/// Final status of a simulation run.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReRunStatus {
    Finished = 0,
    Collided = 1,
    Timeout = 2,
    Fault = 3,
}

/// Executed ego state of one simulation step.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ReEgoState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    pub a: f64,
    /// Largest risk borne by any other road user at this step.
    pub max_user_risk: f64,
    pub ego_risk: f64,
}

/// Opaque scenario handle.
pub struct ReScenario(Scenario);

/// Opaque planner configuration handle.
pub struct ReConfig(PlannerConfig);

/// Opaque simulation log handle.
pub struct ReLog(SimulationLog);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> ReStatus {
    match err {
        Error::Io { .. } => ReStatus::Io,
        Error::Parse(_) | Error::Schema(_) => ReStatus::Parse,
        Error::Validation { .. }
        | Error::Config { .. }
        | Error::NumericalInput(_)
        | Error::Input(_) => ReStatus::Validation,
        Error::PlannerFault(_) => ReStatus::PlannerFault,
    }
}

fn fail(status: ReStatus, msg: impl Into<String>) -> ReStatus {
    set_error(msg);
    status
}

/// Runs `f` with panics turned into [`ReStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), (ReStatus, String)>) -> ReStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ReStatus::Ok,
        Ok(Err((status, msg))) => fail(status, msg),
        Err(_) => fail(ReStatus::Panic, "panic inside riskethics"),
    }
}

fn core(err: Error) -> (ReStatus, String) {
    (status_of(&err), err.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, (ReStatus, String)> {
    if p.is_null() {
        return Err((ReStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ReStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, (ReStatus, String)> {
    p.as_ref()
        .ok_or_else(|| (ReStatus::NullPointer, format!("{name} is null")))
}

fn out_arg<T>(out: *mut *mut T) -> Result<(), (ReStatus, String)> {
    if out.is_null() {
        return Err((ReStatus::NullPointer, "output pointer is null".into()));
    }
    Ok(())
}

/// Caller has checked `out` with [`out_arg`].
unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (ReStatus, String)> {
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn re_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn re_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn re_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn re_scenario_from_json(
    json: *const c_char,
    out: *mut *mut ReScenario,
) -> ReStatus {
    guard(|| {
        out_arg(out)?;
        let text = str_arg(json, "json")?;
        put(out, ReScenario(Scenario::from_json(text).map_err(core)?))
    })
}

/// Loads a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn re_scenario_load(
    path: *const c_char,
    out: *mut *mut ReScenario,
) -> ReStatus {
    guard(|| {
        out_arg(out)?;
        let path = str_arg(path, "path")?;
        put(
            out,
            ReScenario(riskethics::load_scenario(path).map_err(core)?),
        )
    })
}

/// # Safety
/// `scenario` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn re_scenario_free(scenario: *mut ReScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of road users other than the ego.
///
/// # Safety
/// `scenario` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn re_scenario_agent_count(scenario: *const ReScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.agents.len())
}

/// Default planner configuration (ethical profile).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn re_config_default(out: *mut *mut ReConfig) -> ReStatus {
    guard(|| {
        out_arg(out)?;
        put(out, ReConfig(PlannerConfig::default()))
    })
}

/// Parses a configuration file's JSON text; missing sections take defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn re_config_from_json(
    json: *const c_char,
    out: *mut *mut ReConfig,
) -> ReStatus {
    guard(|| {
        out_arg(out)?;
        let text = str_arg(json, "json")?;
        put(out, ReConfig(PlannerConfig::from_json(text).map_err(core)?))
    })
}

/// Switches the profile: "ethical", "selfish" or "standard".
///
/// # Safety
/// `config` must be a live handle; `profile` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn re_config_set_profile(
    config: *mut ReConfig,
    profile: *const c_char,
) -> ReStatus {
    guard(|| {
        let name = str_arg(profile, "profile")?;
        let cfg = config
            .as_mut()
            .ok_or((ReStatus::NullPointer, "config is null".to_string()))?;
        cfg.0.ethics.profile = name.parse::<Profile>().map_err(core)?;
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn re_config_free(config: *mut ReConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Simulates the scenario in closed loop. A planner fault inside the run is
/// not an error: the log is returned with status `RE_RUN_STATUS_FAULT`.
///
/// # Safety
/// `scenario` and `config` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn re_run(
    scenario: *const ReScenario,
    config: *const ReConfig,
    seed: u64,
    out: *mut *mut ReLog,
) -> ReStatus {
    guard(|| {
        out_arg(out)?;
        let sc = ref_arg(scenario, "scenario")?;
        let cfg = ref_arg(config, "config")?;
        put(
            out,
            ReLog(riskethics::run(&sc.0, &cfg.0, seed).map_err(core)?),
        )
    })
}

/// # Safety
/// `log` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn re_log_status(log: *const ReLog) -> ReRunStatus {
    match log.as_ref().map(|l| l.0.summary.status) {
        Some(RunStatus::Finished) => ReRunStatus::Finished,
        Some(RunStatus::Collided) => ReRunStatus::Collided,
        Some(RunStatus::Timeout) => ReRunStatus::Timeout,
        Some(RunStatus::Fault) | None => ReRunStatus::Fault,
    }
}

/// Number of executed steps; 0 for null.
///
/// # Safety
/// `log` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn re_log_step_count(log: *const ReLog) -> usize {
    log.as_ref().map_or(0, |l| l.0.steps.len())
}

/// Number of collision events; 0 for null.
///
/// # Safety
/// `log` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn re_log_collision_count(log: *const ReLog) -> usize {
    log.as_ref().map_or(0, |l| l.0.summary.collisions.len())
}

/// Ego state and risks at step `index`.
///
/// # Safety
/// `log` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn re_log_ego_state(
    log: *const ReLog,
    index: usize,
    out: *mut ReEgoState,
) -> ReStatus {
    guard(|| {
        let log = ref_arg(log, "log")?;
        let out = out
            .as_mut()
            .ok_or((ReStatus::NullPointer, "output pointer is null".to_string()))?;
        let step = log.0.steps.get(index).ok_or_else(|| {
            (
                ReStatus::OutOfRange,
                format!("step {index} of {}", log.0.steps.len()),
            )
        })?;
        *out = ReEgoState {
            t: step.t,
            x: step.ego.x,
            y: step.ego.y,
            heading: step.ego.heading,
            v: step.ego.v,
            a: step.ego.a,
            max_user_risk: step.risks.iter().map(|r| r.risk).fold(0.0, f64::max),
            ego_risk: step.ego_risk,
        };
        Ok(())
    })
}

/// The log as JSON lines. Release with [`re_string_free`].
///
/// # Safety
/// `log` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn re_log_to_jsonl(log: *const ReLog, out: *mut *mut c_char) -> ReStatus {
    guard(|| {
        out_arg(out)?;
        let log = ref_arg(log, "log")?;
        let text = CString::new(log.0.to_jsonl())
            .map_err(|_| (ReStatus::Parse, "log contains a NUL byte".to_string()))?;
        *out = text.into_raw();
        Ok(())
    })
}

/// # Safety
/// `log` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn re_log_free(log: *mut ReLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}
