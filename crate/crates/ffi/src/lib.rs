//! C ABI for epshape.
//!
//! Every fallible function returns an [`EpsStatus`]; on failure a message is
//! available from [`eps_last_error`] on the same thread. Handles are opaque
//! and owned by the caller, who releases them with the matching `*_free`.
//! Strings returned through `char **` are released with [`eps_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use epshape::algebra::SE3Element;
use epshape::cli::{stability_json, trajectory_csv};
use epshape::scenario::{load_scenario, parse_scenario, Scenario};
use epshape::sim::{simulate_loop, simulate_with_poses, stability, Trajectory, DEFAULT_FD_STEP};
use epshape::systems::InertiaParams;
use epshape::verify::{self, VerifyOptions};
use epshape::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    Null = 1,
    /// The scenario text is not well-formed.
    Parse = 2,
    /// The scenario is well-formed but violates a constraint.
    Validation = 3,
    /// Integration or an eigen-solve produced non-finite values or failed.
    Numerical = 4,
    /// The requested equilibrium is not a fixed point.
    NotEquilibrium = 5,
    /// A string argument is not valid UTF-8.
    Utf8 = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
    /// A caller buffer is too small or an index is out of range.
    Range = 8,
    /// A file could not be read.
    Io = 9,
}

/// A parsed and validated scenario.
pub struct EpsScenario {
    inner: Scenario,
}

/// A simulated trajectory together with the parameters that produced it.
pub struct EpsTrajectory {
    inner: Trajectory,
    params: InertiaParams,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> EpsStatus {
    match e {
        Error::Parse { .. } => EpsStatus::Parse,
        Error::Io(_) => EpsStatus::Io,
        Error::NotAnEquilibrium { .. } => EpsStatus::NotEquilibrium,
        Error::NonFiniteState { .. }
        | Error::NoConvergence
        | Error::NonFinite(_)
        | Error::SingularInertia => EpsStatus::Numerical,
        _ => EpsStatus::Validation,
    }
}

struct Fail(EpsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EpsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EpsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            EpsStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(EpsStatus::Null, format!("`{what}` is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(EpsStatus::Utf8, format!("`{what}`: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn to_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(EpsStatus::Utf8, "interior NUL in output".into()))
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err(Fail(
            EpsStatus::Range,
            format!("buffer holds {len} values, need {}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next epshape call on this thread.
#[no_mangle]
pub extern "C" fn eps_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from an epshape `char **` output and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn eps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses scenario JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eps_scenario_parse(
    json: *const c_char,
    out: *mut *mut EpsScenario,
) -> EpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inner = parse_scenario(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(EpsScenario { inner }));
        Ok(())
    })
}

/// Reads and parses a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eps_scenario_load(
    path: *const c_char,
    out: *mut *mut EpsScenario,
) -> EpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inner = load_scenario(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(EpsScenario { inner }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from `eps_scenario_parse`/`eps_scenario_load`.
#[no_mangle]
pub unsafe extern "C" fn eps_scenario_free(s: *mut EpsScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Canonical JSON of the scenario, with the initial state made explicit.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eps_scenario_to_json(
    s: *const EpsScenario,
    out: *mut *mut c_char,
) -> EpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = to_c_string(ref_arg(s, "scenario")?.inner.to_json())?;
        Ok(())
    })
}

/// Number of stability-condition warnings raised while validating.
///
/// # Safety
/// `s` must be null or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn eps_scenario_warning_count(s: *const EpsScenario) -> usize {
    s.as_ref().map_or(0, |s| s.inner.warnings.len())
}

/// Integrates the scenario. With `reconstruct` nonzero the group trajectory
/// is integrated alongside, starting at the identity.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eps_simulate(
    s: *const EpsScenario,
    reconstruct: i32,
    out: *mut *mut EpsTrajectory,
) -> EpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let sc = &ref_arg(s, "scenario")?.inner;
        let cl = sc.closed_loop()?;
        let inner = if reconstruct != 0 {
            simulate_with_poses(&cl, &sc.initial, &sc.integrator, &SE3Element::identity())?
        } else {
            simulate_loop(&cl, &sc.initial, &sc.integrator)?
        };
        *out = Box::into_raw(Box::new(EpsTrajectory {
            inner,
            params: sc.inertia,
        }));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from `eps_simulate`.
#[no_mangle]
pub unsafe extern "C" fn eps_trajectory_free(t: *mut EpsTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of samples, including t = 0. Zero for a null handle.
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn eps_trajectory_len(t: *const EpsTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.inner.len())
}

/// Length of one flat phase-space sample: Π, P, then the advected fields
/// the system carries (Γ, h, Θ, Δ₁, δ₁, Δ₂, δ₂ in that order).
///
/// # Safety
/// `t` must be null or a live trajectory handle.
#[no_mangle]
pub unsafe extern "C" fn eps_trajectory_state_dim(t: *const EpsTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.inner.layout.dim())
}

/// Copies the sample times into `buf[0..len)`.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn eps_trajectory_times(
    t: *const EpsTrajectory,
    buf: *mut f64,
    len: usize,
) -> EpsStatus {
    guard(|| copy_out(&ref_arg(t, "trajectory")?.inner.times, buf, len))
}

/// Copies the total energy at every sample into `buf[0..len)`.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn eps_trajectory_energy(
    t: *const EpsTrajectory,
    buf: *mut f64,
    len: usize,
) -> EpsStatus {
    guard(|| copy_out(&ref_arg(t, "trajectory")?.inner.energy, buf, len))
}

/// Copies sample `index` as a flat phase point into `buf[0..len)`.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn eps_trajectory_state(
    t: *const EpsTrajectory,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> EpsStatus {
    guard(|| {
        let t = ref_arg(t, "trajectory")?;
        let s = t.inner.states.get(index).ok_or_else(|| {
            Fail(
                EpsStatus::Range,
                format!("index {index} out of {}", t.inner.len()),
            )
        })?;
        copy_out(&t.inner.layout.flatten(&t.params, s)?, buf, len)
    })
}

/// Copies pose `index` as R (row-major, 9 values) followed by x (3 values).
/// Fails with `Validation` when the trajectory was simulated without poses.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn eps_trajectory_pose(
    t: *const EpsTrajectory,
    index: usize,
    buf: *mut f64,
    len: usize,
) -> EpsStatus {
    guard(|| {
        let t = ref_arg(t, "trajectory")?;
        let poses = t.inner.poses.as_ref().ok_or(Error::MissingField("poses"))?;
        let p = poses.get(index).ok_or_else(|| {
            Fail(
                EpsStatus::Range,
                format!("index {index} out of {}", poses.len()),
            )
        })?;
        let r = p.rotation();
        let mut v: Vec<f64> = (0..3)
            .flat_map(|i| (0..3).map(move |j| r[(i, j)]))
            .collect();
        v.extend(p.translation().iter());
        copy_out(&v, buf, len)
    })
}

/// Trajectory as CSV text, one row per sample.
///
/// # Safety
/// `t` must be a live trajectory handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eps_trajectory_csv(
    t: *const EpsTrajectory,
    out: *mut *mut c_char,
) -> EpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = ref_arg(t, "trajectory")?;
        *out = to_c_string(trajectory_csv(&t.inner, &t.params))?;
        Ok(())
    })
}

/// Linearizes the closed loop at the scenario's equilibrium and returns the
/// stability report as JSON.
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eps_stability_json(
    s: *const EpsScenario,
    out: *mut *mut c_char,
) -> EpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let sc = &ref_arg(s, "scenario")?.inner;
        let eq = sc.equilibrium_for_initial().ok_or_else(|| {
            Fail(
                EpsStatus::Validation,
                "the scenario defines no equilibrium".into(),
            )
        })??;
        let report = stability(&sc.closed_loop()?, &eq, DEFAULT_FD_STEP)?;
        *out = to_c_string(stability_json(&report).to_string())?;
        Ok(())
    })
}

/// Runs the property suite. `filter` may be null. `passed` receives 1 when
/// every selected property holds.
///
/// # Safety
/// `filter` must be null or NUL-terminated; `out` and `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eps_verify_json(
    seed: u64,
    filter: *const c_char,
    out: *mut *mut c_char,
    passed: *mut i32,
) -> EpsStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let passed = out_arg(passed, "passed")?;
        let filter = if filter.is_null() {
            None
        } else {
            Some(str_arg(filter, "filter")?.to_string())
        };
        let report = verify::run(&VerifyOptions {
            seed,
            filter,
            mutation: None,
        });
        *passed = i32::from(report.passed() && !report.results.is_empty());
        *out = to_c_string(report.to_json().to_string())?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last() -> String {
        unsafe { CStr::from_ptr(eps_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    #[test]
    fn errors_map_to_status() {
        assert_eq!(
            status_of(&Error::NotAnEquilibrium { residual: 1.0 }),
            EpsStatus::NotEquilibrium
        );
        assert_eq!(
            status_of(&Error::NonFiniteState { t: 1.0 }),
            EpsStatus::Numerical
        );
        assert_eq!(status_of(&Error::Io("x".into())), EpsStatus::Io);
        assert_eq!(
            status_of(&Error::ZeroDesiredVelocity),
            EpsStatus::Validation
        );
    }

    #[test]
    fn guard_catches_panics_and_clears_on_success() {
        let prev = std::panic::take_hook();
        std::panic::set_hook(Box::new(|_| {}));
        let status = guard(|| panic!("boom"));
        std::panic::set_hook(prev);
        assert_eq!(status, EpsStatus::Panic);
        assert_eq!(last(), "panic: boom");
        assert_eq!(guard(|| Ok(())), EpsStatus::Ok);
        assert_eq!(last(), "");
    }

    #[test]
    fn copy_out_checks_capacity() {
        let mut buf = [0.0; 2];
        assert!(unsafe { copy_out(&[1.0, 2.0], buf.as_mut_ptr(), 2) }.is_ok());
        assert_eq!(buf, [1.0, 2.0]);
        let err = unsafe { copy_out(&[1.0, 2.0, 3.0], buf.as_mut_ptr(), 2) }
            .err()
            .unwrap();
        assert_eq!(err.0, EpsStatus::Range);
    }
}
