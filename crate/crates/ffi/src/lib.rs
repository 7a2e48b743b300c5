//! C ABI for the phasefield solver.
//!
//! Every function returns a [`PfStatus`]; on failure a description is
//! available from [`pf_last_error_message`] on the same thread. Simulations
//! are opaque handles created by [`pf_simulation_new`] and released with
//! [`pf_simulation_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use phasefield::{phi1, Complex64, Error, RunConfig, Simulation};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    MissingFile = 4,
    Io = 5,
    Diverged = 6,
    Numeric = 7,
    Unsupported = 8,
    BufferTooSmall = 9,
    NotDefined = 10,
    Panic = 11,
}

/// Opaque simulation handle.
pub struct PfSimulation {
    sim: Simulation,
    diverged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(err: &Error) -> PfStatus {
    match err {
        Error::Config { .. } => PfStatus::Config,
        Error::MissingFile { .. } => PfStatus::MissingFile,
        Error::Io { .. } | Error::Format { .. } => PfStatus::Io,
        Error::Diverged { .. } => PfStatus::Diverged,
        Error::NonFinite { .. } | Error::SingularTable { .. } => PfStatus::Numeric,
        Error::Unsupported(_) | Error::Shape(_) => PfStatus::Unsupported,
    }
}

fn fail(status: PfStatus, msg: impl Into<String>) -> PfStatus {
    set_last_error(msg);
    status
}

/// Runs `f`, converting library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PfStatus>) -> PfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PfStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(PfStatus::Panic, "internal panic"),
    }
}

fn lib_err(err: Error) -> PfStatus {
    fail(status_of(&err), err.to_string())
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, PfStatus> {
    if ptr.is_null() {
        return Err(fail(PfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(PfStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a>(sim: *mut PfSimulation) -> Result<&'a mut PfSimulation, PfStatus> {
    sim.as_mut()
        .ok_or_else(|| fail(PfStatus::NullPointer, "simulation handle is null"))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, PfStatus> {
    ptr.as_mut()
        .ok_or_else(|| fail(PfStatus::NullPointer, format!("{what} is null")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failure on this thread, or NULL.
///
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn pf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Evaluates `phi_1(z) = (e^z - 1) / z` for complex `z = re + i im`.
///
/// # Safety
/// `out_re` and `out_im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_phi1(re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> PfStatus {
    guard(|| {
        let out_re = out(out_re, "out_re")?;
        let out_im = out(out_im, "out_im")?;
        let w = phi1(Complex64::new(re, im));
        *out_re = w.re;
        *out_im = w.im;
        Ok(())
    })
}

/// Creates a simulation from configuration text (`key = value` lines).
///
/// # Safety
/// `config_text` must be a NUL-terminated string and `out_sim` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_new(
    config_text: *const c_char,
    out_sim: *mut *mut PfSimulation,
) -> PfStatus {
    guard(|| {
        let slot = out(out_sim, "out_sim")?;
        *slot = std::ptr::null_mut();
        let text = read_str(config_text, "config_text")?;
        let config: RunConfig = text.parse().map_err(lib_err)?;
        let sim = Simulation::new(&config).map_err(lib_err)?;
        *slot = Box::into_raw(Box::new(PfSimulation {
            sim,
            diverged: false,
        }));
        Ok(())
    })
}

/// Releases a simulation; NULL is ignored.
///
/// # Safety
/// `sim` must come from [`pf_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_free(sim: *mut PfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advances by `steps` steps. After divergence every further call fails.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_advance(sim: *mut PfSimulation, steps: u64) -> PfStatus {
    guard(|| {
        let s = handle(sim)?;
        if s.diverged {
            return Err(fail(PfStatus::Diverged, "simulation has diverged"));
        }
        s.sim.advance(steps).map_err(|e| {
            s.diverged = matches!(e, Error::Diverged { .. });
            lib_err(e)
        })
    })
}

/// Advances to the first step at or after time `t`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_advance_to(sim: *mut PfSimulation, t: f64) -> PfStatus {
    guard(|| {
        let s = handle(sim)?;
        if !t.is_finite() {
            return Err(fail(PfStatus::Config, "t must be finite"));
        }
        let steps = s.sim.config().steps_to(t).saturating_sub(s.sim.step_index());
        if s.diverged {
            return Err(fail(PfStatus::Diverged, "simulation has diverged"));
        }
        s.sim.advance(steps).map_err(|e| {
            s.diverged = matches!(e, Error::Diverged { .. });
            lib_err(e)
        })
    })
}

/// Current simulated time (`step_index * h`).
///
/// # Safety
/// `sim` must be a live handle and `out_time` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_time(sim: *const PfSimulation, out_time: *mut f64) -> PfStatus {
    guard(|| {
        let s = handle(sim.cast_mut())?;
        *out(out_time, "out_time")? = s.sim.time();
        Ok(())
    })
}

/// Number of steps taken so far.
///
/// # Safety
/// `sim` must be a live handle and `out_steps` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_step_index(
    sim: *const PfSimulation,
    out_steps: *mut u64,
) -> PfStatus {
    guard(|| {
        let s = handle(sim.cast_mut())?;
        *out(out_steps, "out_steps")? = s.sim.step_index();
        Ok(())
    })
}

/// Number of grid values (`n` in 1D, `n * n` in 2D).
///
/// # Safety
/// `sim` must be a live handle and `out_len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_field_len(sim: *const PfSimulation, out_len: *mut usize) -> PfStatus {
    guard(|| {
        let s = handle(sim.cast_mut())?;
        *out(out_len, "out_len")? = s.sim.values().len();
        Ok(())
    })
}

/// Copies the real-space field (row-major, `index = i * n + j`) into `buf`.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_copy_field(
    sim: *const PfSimulation,
    buf: *mut f64,
    len: usize,
) -> PfStatus {
    guard(|| {
        let s = handle(sim.cast_mut())?;
        let values = s.sim.values();
        if buf.is_null() {
            return Err(fail(PfStatus::NullPointer, "buf is null"));
        }
        if len < values.len() {
            return Err(fail(
                PfStatus::BufferTooSmall,
                format!("buffer holds {len} values, field has {}", values.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, values.len()).copy_from_slice(values);
        Ok(())
    })
}

/// Free energy of the current field; `PF_STATUS_NOT_DEFINED` for models without one.
///
/// # Safety
/// `sim` must be a live handle and `out_energy` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_free_energy(
    sim: *mut PfSimulation,
    out_energy: *mut f64,
) -> PfStatus {
    guard(|| {
        let s = handle(sim)?;
        let slot = out(out_energy, "out_energy")?;
        match s.sim.diagnostics().map_err(lib_err)?.free_energy {
            Some(f) => {
                *slot = f;
                Ok(())
            }
            None => Err(fail(
                PfStatus::NotDefined,
                format!("model {} has no free energy", s.sim.model().name()),
            )),
        }
    })
}

/// Spatial mean of the current field.
///
/// # Safety
/// `sim` must be a live handle and `out_mean` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pf_simulation_mean(sim: *const PfSimulation, out_mean: *mut f64) -> PfStatus {
    guard(|| {
        let s = handle(sim.cast_mut())?;
        let v = s.sim.values();
        *out(out_mean, "out_mean")? = v.iter().sum::<f64>() / v.len() as f64;
        Ok(())
    })
}

/// Runs a configuration to completion, writing output to `output_dir`
/// (or `run.output_dir` when NULL).
///
/// # Safety
/// `config_text` must be a NUL-terminated string; `output_dir` NULL or one.
#[no_mangle]
pub unsafe extern "C" fn pf_run(config_text: *const c_char, output_dir: *const c_char) -> PfStatus {
    guard(|| {
        let config: RunConfig = read_str(config_text, "config_text")?.parse().map_err(lib_err)?;
        let dir = if output_dir.is_null() {
            config.output_dir.clone()
        } else {
            Path::new(read_str(output_dir, "output_dir")?).to_path_buf()
        };
        phasefield::run(&config, &dir).map(|_| ()).map_err(lib_err)
    })
}
