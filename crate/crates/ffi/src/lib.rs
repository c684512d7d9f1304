//! C ABI for the trajadv workbench.
//!
//! Configurations and run results are opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns a
//! [`TrajadvStatus`]; on failure a description of the last error on the
//! calling thread is available from [`trajadv_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use trajadv::advancement;
use trajadv::controller::ControlMode;
use trajadv::error::ErrorKind;
use trajadv::harness::{self, RunOutput, SimConfig};
use trajadv::{Error, Vec6};

/// Status codes. Values 2 and 3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajadvStatus {
    Ok = 0,
    /// Contract violation or any error without a more specific code.
    Failed = 1,
    Config = 2,
    /// Singular task map or non-finite values during a run.
    Numerical = 3,
    NullPointer = 4,
    Io = 5,
    /// Argument out of range or not valid UTF-8.
    InvalidArgument = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajadvMode {
    CancelAll = 0,
    RetainHelpful = 1,
}

/// Parsed and validated run configuration.
pub struct TrajadvConfig {
    inner: SimConfig,
}

/// Log and summary of a finished run.
pub struct TrajadvRun {
    inner: RunOutput,
}

/// One log row without the torque vector; see [`trajadv_run_row_tau`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TrajadvRow {
    pub t: f64,
    /// Stand-up phase number, 1 to 4.
    pub phase: u8,
    pub psi: f64,
    pub psi_dot: f64,
    pub x: [f64; 6],
    pub x_d: [f64; 6],
    pub xdot: [f64; 6],
    pub xdot_d: [f64; 6],
    pub f_hands: [f64; 6],
    pub f_feet: [f64; 6],
    pub alpha: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TrajadvSummary {
    pub steps: usize,
    pub final_time: f64,
    pub final_psi: f64,
    /// False when the goal pose was never reached; `time_to_goal` is then NaN.
    pub reached_goal: bool,
    pub time_to_goal: f64,
    pub max_psi_dot: f64,
    pub transitions: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TrajadvDecomposition {
    pub alpha: f64,
    pub beta: f64,
    pub par_dir: [f64; 6],
    pub perp_dir: [f64; 6],
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(TrajadvStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match (&e, e.kind()) {
            (Error::Io { .. } | Error::Csv { .. }, _) => TrajadvStatus::Io,
            (_, ErrorKind::Config) => TrajadvStatus::Config,
            (_, ErrorKind::Numerical) => TrajadvStatus::Numerical,
            (_, ErrorKind::Io) => TrajadvStatus::Io,
            _ => TrajadvStatus::Failed,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TrajadvStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, recording any error or panic for `trajadv_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TrajadvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            TrajadvStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            TrajadvStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            TrajadvStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn vec6_arg(p: *const f64, what: &str) -> Result<Vec6, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(Vec6::from_column_slice(std::slice::from_raw_parts(p, 6)))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn arr(v: &Vec6) -> [f64; 6] {
    (*v).into()
}

/// Message of the last failed call on this thread, or null after a
/// successful call. The pointer stays valid until the next call on the same
/// thread.
#[no_mangle]
pub extern "C" fn trajadv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn trajadv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parse a TOML configuration held in memory.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trajadv_config_from_toml(
    toml: *const c_char,
    out: *mut *mut TrajadvConfig,
) -> TrajadvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(toml, "toml")?;
        let inner = SimConfig::from_toml_str(text)?;
        *out = Box::into_raw(Box::new(TrajadvConfig { inner }));
        Ok(())
    })
}

/// Load a TOML configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trajadv_config_load(
    path: *const c_char,
    out: *mut *mut TrajadvConfig,
) -> TrajadvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let inner = SimConfig::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(TrajadvConfig { inner }));
        Ok(())
    })
}

/// Turn free-parameter advancement on or off.
///
/// # Safety
/// `config` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn trajadv_config_set_advancement(
    config: *mut TrajadvConfig,
    enabled: bool,
) -> TrajadvStatus {
    guard(|| {
        out_arg(config, "config")?.inner.advancement = enabled;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn trajadv_config_set_mode(
    config: *mut TrajadvConfig,
    mode: TrajadvMode,
) -> TrajadvStatus {
    guard(|| {
        out_arg(config, "config")?.inner.controller.mode = match mode {
            TrajadvMode::CancelAll => ControlMode::CancelAll,
            TrajadvMode::RetainHelpful => ControlMode::RetainHelpful,
        };
        Ok(())
    })
}

/// Copy of `config` with every hands pulse removed.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trajadv_config_unassisted(
    config: *const TrajadvConfig,
    out: *mut *mut TrajadvConfig,
) -> TrajadvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        *out = Box::into_raw(Box::new(TrajadvConfig {
            inner: c.inner.unassisted(),
        }));
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trajadv_config_free(config: *mut TrajadvConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Run the closed-loop simulation described by `config`.
///
/// # Safety
/// `config` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trajadv_run(
    config: *const TrajadvConfig,
    out: *mut *mut TrajadvRun,
) -> TrajadvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let inner = harness::run_simulation(&c.inner)?;
        *out = Box::into_raw(Box::new(TrajadvRun { inner }));
        Ok(())
    })
}

/// Number of log rows, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trajadv_run_row_count(run: *const TrajadvRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.log.rows.len())
}

/// Length of the torque vector of every row, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn trajadv_run_tau_len(run: *const TrajadvRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.log.n_tau)
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trajadv_run_row(
    run: *const TrajadvRun,
    index: usize,
    out: *mut TrajadvRow,
) -> TrajadvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let row = r.inner.log.rows.get(index).ok_or_else(|| {
            Failure(
                TrajadvStatus::InvalidArgument,
                format!("row {index} out of range ({} rows)", r.inner.log.rows.len()),
            )
        })?;
        *out = TrajadvRow {
            t: row.t,
            phase: row.phase.index(),
            psi: row.psi,
            psi_dot: row.psi_dot,
            x: arr(&row.x),
            x_d: arr(&row.x_d),
            xdot: arr(&row.xdot),
            xdot_d: arr(&row.xdot_d),
            f_hands: arr(&row.f_hands),
            f_feet: arr(&row.f_feet),
            alpha: row.alpha,
        };
        Ok(())
    })
}

/// Copy the torques of row `index` into `out`, which holds `len` doubles.
/// `len` must equal [`trajadv_run_tau_len`].
///
/// # Safety
/// `run` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn trajadv_run_row_tau(
    run: *const TrajadvRun,
    index: usize,
    out: *mut f64,
    len: usize,
) -> TrajadvStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let row = r.inner.log.rows.get(index).ok_or_else(|| {
            Failure(
                TrajadvStatus::InvalidArgument,
                format!("row {index} out of range"),
            )
        })?;
        if len != row.tau.len() {
            return Err(Failure(
                TrajadvStatus::InvalidArgument,
                format!("torque buffer holds {len} values, row has {}", row.tau.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&row.tau);
        Ok(())
    })
}

/// # Safety
/// `run` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn trajadv_run_summary(
    run: *const TrajadvRun,
    out: *mut TrajadvSummary,
) -> TrajadvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = &run.as_ref().ok_or_else(|| null("run"))?.inner.summary;
        *out = TrajadvSummary {
            steps: s.steps,
            final_time: s.final_time,
            final_psi: s.final_psi,
            reached_goal: s.time_to_goal.is_some(),
            time_to_goal: s.time_to_goal.unwrap_or(f64::NAN),
            max_psi_dot: s.max_psi_dot,
            transitions: s.transitions.len(),
        };
        Ok(())
    })
}

/// Write `log.csv` and the SVG plots of `run` into directory `dir`. The
/// reference curve of `config` is drawn as the nominal trace.
///
/// # Safety
/// Handles must be live and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn trajadv_run_write_artifacts(
    run: *const TrajadvRun,
    config: *const TrajadvConfig,
    dir: *const c_char,
) -> TrajadvStatus {
    guard(|| {
        let r = run.as_ref().ok_or_else(|| null("run"))?;
        let c = config.as_ref().ok_or_else(|| null("config"))?;
        let dir = str_arg(dir, "dir")?;
        harness::write_artifacts(&r.inner, &c.inner, Path::new(dir))?;
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn trajadv_run_free(run: *mut TrajadvRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Clamped free-parameter rate for a measured task velocity and curve
/// tangent, both 6 doubles.
///
/// # Safety
/// `xdot` and `curve_deriv` must point to 6 doubles, `out` to one.
#[no_mangle]
pub unsafe extern "C" fn trajadv_psi_dot_update(
    xdot: *const f64,
    curve_deriv: *const f64,
    psi_dot_upper: f64,
    eps_v: f64,
    out: *mut f64,
) -> TrajadvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let x = vec6_arg(xdot, "xdot")?;
        let d = vec6_arg(curve_deriv, "curve_deriv")?;
        *out = advancement::psi_dot_update(&x, &d, psi_dot_upper, eps_v)?;
        Ok(())
    })
}

/// Split an induced task acceleration along and across a desired velocity.
///
/// # Safety
/// `omega_f` and `xdot_d` must point to 6 doubles, `out` to a writable struct.
#[no_mangle]
pub unsafe extern "C" fn trajadv_decompose(
    omega_f: *const f64,
    xdot_d: *const f64,
    eps_v: f64,
    out: *mut TrajadvDecomposition,
) -> TrajadvStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let f = vec6_arg(omega_f, "omega_f")?;
        let v = vec6_arg(xdot_d, "xdot_d")?;
        if !f.iter().chain(v.iter()).all(|x| x.is_finite()) || !eps_v.is_finite() {
            return Err(Failure(
                TrajadvStatus::InvalidArgument,
                "inputs must be finite".into(),
            ));
        }
        let d = advancement::decompose(&f, &v, eps_v);
        *out = TrajadvDecomposition {
            alpha: d.alpha,
            beta: d.beta,
            par_dir: arr(&d.par_dir),
            perp_dir: arr(&d.perp_dir),
        };
        Ok(())
    })
}
