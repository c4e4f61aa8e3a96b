//! C ABI over the covscat core: opaque handles, status codes and a thread-local error message.
//!
//! Every function returns a [`CovscatStatus`]; outputs go through pointer arguments.
//! Handles are created by `*_new`/`*_from_*` functions and released by the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use covscat::center::{from_center, reduced_mass, to_center, CenterDecomposition};
use covscat::cli::{execute, summary_json, write_artifacts, RunConfig, RunOutput};
use covscat::dynamics::stationary::phase_shift_principal;
use covscat::dynamics::{build_interacting_mass, MassOperator, Potential, RadialChannel};
use covscat::fourvec::FourVector;
use covscat::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovscatStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Invalid configuration or parameters.
    Config = 3,
    /// A numerical stage failed; see the last error message.
    Numerical = 4,
    /// The output buffer is too small; the required size was written.
    BufferTooSmall = 5,
    Panic = 6,
}

pub const COVSCAT_POTENTIAL_ZERO: u32 = 0;
pub const COVSCAT_POTENTIAL_SQUARE_WELL: u32 = 1;
pub const COVSCAT_POTENTIAL_GAUSSIAN: u32 = 2;

/// `kind` is one of the COVSCAT_POTENTIAL_* constants; `length` is the well radius or the Gaussian width.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovscatPotential {
    pub kind: u32,
    pub depth: f64,
    pub length: f64,
}

/// Mass operator on one radial channel, with its eigendecomposition.
pub struct CovscatMassOperator(MassOperator);

/// Run configuration.
pub struct CovscatConfig(RunConfig);

/// Result of one experiment run.
pub struct CovscatRun(RunOutput);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> CovscatStatus {
    set_error(e.to_string());
    match e {
        Error::Config(_) => CovscatStatus::Config,
        _ => CovscatStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> CovscatStatus) -> CovscatStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            CovscatStatus::Panic
        }
    }
}

fn potential(p: CovscatPotential) -> Result<Potential, CovscatStatus> {
    match p.kind {
        COVSCAT_POTENTIAL_ZERO => Ok(Potential::Zero),
        COVSCAT_POTENTIAL_SQUARE_WELL => Ok(Potential::SquareWell { depth: p.depth, radius: p.length }),
        COVSCAT_POTENTIAL_GAUSSIAN => Ok(Potential::Gaussian { depth: p.depth, width: p.length }),
        k => {
            set_error(format!("unknown potential kind {k}"));
            Err(CovscatStatus::InvalidArgument)
        }
    }
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, CovscatStatus> {
    if s.is_null() {
        set_error("null string");
        return Err(CovscatStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string is not valid UTF-8");
        CovscatStatus::InvalidArgument
    })
}

/// Copies `text` with a terminating NUL into `buf` of `len` bytes; `needed` receives len(text)+1.
unsafe fn write_str(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> CovscatStatus {
    let n = text.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || len < n {
        return CovscatStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    CovscatStatus::Ok
}

/// Message of the last failed call on this thread.
///
/// # Safety
/// `buf` must hold `len` bytes or be null; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn covscat_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> CovscatStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    write_str(&msg, buf, len, needed)
}

/// Center decomposition of `n` momenta. `momenta` holds 4n values (E, px, py, pz);
/// `u` receives 4 values and `q` 4n.
///
/// # Safety
/// Pointers must reference arrays of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn covscat_to_center(n: usize, momenta: *const f64, masses: *const f64, u: *mut f64, q: *mut f64) -> CovscatStatus {
    guard(|| {
        if momenta.is_null() || masses.is_null() || u.is_null() || q.is_null() {
            return CovscatStatus::NullPointer;
        }
        if n == 0 {
            set_error("need at least one momentum");
            return CovscatStatus::InvalidArgument;
        }
        let flat = std::slice::from_raw_parts(momenta, 4 * n);
        let m = std::slice::from_raw_parts(masses, n);
        let p: Vec<FourVector> = flat.chunks(4).map(|c| FourVector([c[0], c[1], c[2], c[3]])).collect();
        match to_center(&p, m) {
            Ok(d) => {
                std::slice::from_raw_parts_mut(u, 4).copy_from_slice(&d.u.0);
                let out = std::slice::from_raw_parts_mut(q, 4 * n);
                for (o, qi) in out.chunks_mut(4).zip(&d.q) {
                    o.copy_from_slice(&qi.0);
                }
                CovscatStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Inverse of [`covscat_to_center`]: momenta (4n values) from u (4) and q (4n).
///
/// # Safety
/// Pointers must reference arrays of the stated sizes.
#[no_mangle]
pub unsafe extern "C" fn covscat_from_center(n: usize, u: *const f64, q: *const f64, masses: *const f64, momenta: *mut f64) -> CovscatStatus {
    guard(|| {
        if momenta.is_null() || masses.is_null() || u.is_null() || q.is_null() {
            return CovscatStatus::NullPointer;
        }
        let uu = std::slice::from_raw_parts(u, 4);
        let qs = std::slice::from_raw_parts(q, 4 * n);
        let d = CenterDecomposition {
            u: FourVector([uu[0], uu[1], uu[2], uu[3]]),
            q: qs.chunks(4).map(|c| FourVector([c[0], c[1], c[2], c[3]])).collect(),
            masses: std::slice::from_raw_parts(masses, n).to_vec(),
        };
        match from_center(&d) {
            Ok(p) => {
                let out = std::slice::from_raw_parts_mut(momenta, 4 * n);
                for (o, pi) in out.chunks_mut(4).zip(&p) {
                    o.copy_from_slice(&pi.0);
                }
                CovscatStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Principal-branch phase shift δ_l(z) from the stationary radial equation.
///
/// # Safety
/// `delta` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covscat_phase_shift(l: u32, m1: f64, m2: f64, v: CovscatPotential, z: f64, delta: *mut f64) -> CovscatStatus {
    guard(|| {
        if delta.is_null() {
            return CovscatStatus::NullPointer;
        }
        let v = match potential(v) {
            Ok(v) => v,
            Err(s) => return s,
        };
        if !(m1 > 0.0 && m2 > 0.0) {
            set_error(format!("masses must be positive, got {m1}, {m2}"));
            return CovscatStatus::InvalidArgument;
        }
        match v.validate().and_then(|_| phase_shift_principal(l, reduced_mass(m1, m2), &v, z)) {
            Ok(d) => {
                *delta = d;
                CovscatStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Builds M′ = M + V on `n` points out to `radius`.
///
/// # Safety
/// `out` must be a valid pointer; the handle is released with [`covscat_mass_operator_free`].
#[no_mangle]
pub unsafe extern "C" fn covscat_mass_operator_new(
    l: u32,
    n: usize,
    radius: f64,
    m1: f64,
    m2: f64,
    v: CovscatPotential,
    out: *mut *mut CovscatMassOperator,
) -> CovscatStatus {
    guard(|| {
        if out.is_null() {
            return CovscatStatus::NullPointer;
        }
        let v = match potential(v) {
            Ok(v) => v,
            Err(s) => return s,
        };
        let built = RadialChannel::with_radius(l, n, radius, m1, m2).and_then(|ch| build_interacting_mass(&ch, &v));
        match built {
            Ok(m) => {
                *out = Box::into_raw(Box::new(CovscatMassOperator(m)));
                CovscatStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `op` must come from [`covscat_mass_operator_new`] and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn covscat_mass_operator_free(op: *mut CovscatMassOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// # Safety
/// `op` must be a live handle; `dim` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covscat_mass_operator_dim(op: *const CovscatMassOperator, dim: *mut usize) -> CovscatStatus {
    if op.is_null() || dim.is_null() {
        return CovscatStatus::NullPointer;
    }
    *dim = (*op).0.dim();
    CovscatStatus::Ok
}

/// Copies the ascending eigenvalues into `values` (length ≥ dim).
///
/// # Safety
/// `op` must be a live handle and `values` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn covscat_mass_operator_eigenvalues(op: *const CovscatMassOperator, values: *mut f64, len: usize) -> CovscatStatus {
    if op.is_null() || values.is_null() {
        return CovscatStatus::NullPointer;
    }
    let ev = (*op).0.eigenvalues();
    if len < ev.len() {
        set_error(format!("need {} values, buffer holds {len}", ev.len()));
        return CovscatStatus::BufferTooSmall;
    }
    std::slice::from_raw_parts_mut(values, ev.len()).copy_from_slice(ev);
    CovscatStatus::Ok
}

/// # Safety
/// `op` must be a live handle; `count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covscat_mass_operator_bound_states(op: *const CovscatMassOperator, count: *mut usize) -> CovscatStatus {
    if op.is_null() || count.is_null() {
        return CovscatStatus::NullPointer;
    }
    *count = (*op).0.bound_states().len();
    CovscatStatus::Ok
}

/// Configuration from TOML text; an empty string gives the defaults.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn covscat_config_from_toml(toml: *const c_char, out: *mut *mut CovscatConfig) -> CovscatStatus {
    guard(|| {
        if out.is_null() {
            return CovscatStatus::NullPointer;
        }
        let text = match c_str(toml) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match RunConfig::from_toml(text) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(CovscatConfig(c)));
                CovscatStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `cfg` must come from [`covscat_config_from_toml`]; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn covscat_config_free(cfg: *mut CovscatConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Applies one `key.path=value` override.
///
/// # Safety
/// `cfg` must be a live handle and `assignment` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn covscat_config_set(cfg: *mut CovscatConfig, assignment: *const c_char) -> CovscatStatus {
    guard(|| {
        if cfg.is_null() {
            return CovscatStatus::NullPointer;
        }
        let a = match c_str(assignment) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match (*cfg).0.set(a) {
            Ok(()) => CovscatStatus::Ok,
            Err(e) => status_of(&e),
        }
    })
}

/// Diagnostics joined by newlines (empty when valid); `count` receives their number.
///
/// # Safety
/// `cfg` must be a live handle; `buf` holds `len` bytes or is null; `count` and `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn covscat_config_validate(cfg: *const CovscatConfig, count: *mut usize, buf: *mut c_char, len: usize, needed: *mut usize) -> CovscatStatus {
    if cfg.is_null() {
        return CovscatStatus::NullPointer;
    }
    let d = (*cfg).0.validate();
    if !count.is_null() {
        *count = d.len();
    }
    if buf.is_null() && len == 0 {
        if !needed.is_null() {
            *needed = d.join("\n").len() + 1;
        }
        return CovscatStatus::Ok;
    }
    write_str(&d.join("\n"), buf, len, needed)
}

/// SHA-256 config digest as 64 hex characters.
///
/// # Safety
/// `cfg` must be a live handle; `buf` holds `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn covscat_config_digest(cfg: *const CovscatConfig, buf: *mut c_char, len: usize) -> CovscatStatus {
    if cfg.is_null() {
        return CovscatStatus::NullPointer;
    }
    write_str(&(*cfg).0.digest(), buf, len, std::ptr::null_mut())
}

/// Validates and runs the configured experiment. A failing numerical stage returns
/// `Numerical` with the stage named in the error message.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer; release the run with [`covscat_run_free`].
#[no_mangle]
pub unsafe extern "C" fn covscat_run(cfg: *const CovscatConfig, out: *mut *mut CovscatRun) -> CovscatStatus {
    guard(|| {
        if cfg.is_null() || out.is_null() {
            return CovscatStatus::NullPointer;
        }
        let c = &(*cfg).0;
        let d = c.validate();
        if !d.is_empty() {
            set_error(d.join("\n"));
            return CovscatStatus::Config;
        }
        match execute(c) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(CovscatRun(r)));
                CovscatStatus::Ok
            }
            Err(f) => {
                let s = status_of(&f.error);
                set_error(f.to_string());
                s
            }
        }
    })
}

/// # Safety
/// `run` must come from [`covscat_run`]; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn covscat_run_free(run: *mut CovscatRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Whether every verdict passed, and the number of verdicts.
///
/// # Safety
/// `run` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn covscat_run_passed(run: *const CovscatRun, passed: *mut bool, verdicts: *mut usize) -> CovscatStatus {
    if run.is_null() {
        return CovscatStatus::NullPointer;
    }
    let s = &(*run).0.summary;
    if !passed.is_null() {
        *passed = s.passed();
    }
    if !verdicts.is_null() {
        *verdicts = s.verdicts.len();
    }
    CovscatStatus::Ok
}

/// Verdict `index`: pass flag, measured value and tolerance.
///
/// # Safety
/// `run` must be a live handle; output pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn covscat_run_verdict(run: *const CovscatRun, index: usize, pass: *mut bool, value: *mut f64, tolerance: *mut f64) -> CovscatStatus {
    if run.is_null() {
        return CovscatStatus::NullPointer;
    }
    let r = &*run;
    let Some(v) = r.0.summary.verdicts.get(index) else {
        set_error(format!("verdict index {index} out of range"));
        return CovscatStatus::InvalidArgument;
    };
    if !pass.is_null() {
        *pass = v.pass;
    }
    if !value.is_null() {
        *value = v.value;
    }
    if !tolerance.is_null() {
        *tolerance = v.tolerance;
    }
    CovscatStatus::Ok
}

/// Name of verdict `index`.
///
/// # Safety
/// `run` must be a live handle; `buf` holds `len` bytes or is null.
#[no_mangle]
pub unsafe extern "C" fn covscat_run_verdict_name(run: *const CovscatRun, index: usize, buf: *mut c_char, len: usize, needed: *mut usize) -> CovscatStatus {
    if run.is_null() {
        return CovscatStatus::NullPointer;
    }
    let r = &*run;
    match r.0.summary.verdicts.get(index) {
        Some(v) => write_str(&v.check, buf, len, needed),
        None => CovscatStatus::InvalidArgument,
    }
}

/// Run summary as JSON.
///
/// # Safety
/// `run` must be a live handle; `buf` holds `len` bytes or is null.
#[no_mangle]
pub unsafe extern "C" fn covscat_run_summary_json(run: *const CovscatRun, buf: *mut c_char, len: usize, needed: *mut usize) -> CovscatStatus {
    if run.is_null() {
        return CovscatStatus::NullPointer;
    }
    write_str(&summary_json(&(*run).0.summary), buf, len, needed)
}

/// Writes the run's artifacts into `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn covscat_run_write(run: *const CovscatRun, dir: *const c_char, plot_data: bool) -> CovscatStatus {
    guard(|| {
        if run.is_null() {
            return CovscatStatus::NullPointer;
        }
        let d = match c_str(dir) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match write_artifacts(Path::new(d), &(*run).0, plot_data) {
            Ok(_) => CovscatStatus::Ok,
            Err(e) => status_of(&e),
        }
    })
}
