//! C ABI for `aohf`.
//!
//! Systems and solutions are opaque heap handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`AohfStatus`]; on failure a message is kept per thread and can be read with
//! [`aohf_last_error`]. Panics never cross the boundary.
//!
//! Matrices are exchanged as row-major `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aohf::integrals::{parse_aoints, random_system, AoSystem};
use aohf::report::{self, RunReport};
use aohf::scf::{
    scf_density_descent, scf_roothaan, verify_equivalence, ScfOptions, ScfSolution, Solver,
};
use aohf::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AohfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidSystem = 5,
    InvalidArgument = 6,
    Numerical = 7,
    Unconverged = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AohfSolver {
    Roothaan = 0,
    DensityDescent = 1,
}

/// Solver settings. Start from [`aohf_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AohfOptions {
    pub max_iterations: usize,
    pub energy_tolerance: f64,
    pub gradient_tolerance: f64,
    /// 0 disables DIIS.
    pub diis_depth: usize,
    pub initial_step: f64,
}

/// Residuals of the Roothaan-Hall equivalence check.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AohfEquivalence {
    pub occupied_eigen_residual: f64,
    pub occupied_offdiagonal: f64,
    pub occupied_span_residual: f64,
    pub commutator_residual: f64,
    pub density_difference: f64,
    pub passed: bool,
}

/// A validated spin-orbital system.
pub struct AohfSystem {
    inner: AoSystem,
}

/// A finished solver run, converged or not.
pub struct AohfSolution {
    inner: ScfSolution,
    label: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(e: &Error) -> AohfStatus {
    match e {
        Error::Parse { .. } => AohfStatus::Parse,
        Error::NotSquare { .. }
        | Error::DimensionMismatch { .. }
        | Error::NonFinite
        | Error::NotSymmetric { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::LinearDependence { .. }
        | Error::InvalidSystem(_) => AohfStatus::InvalidSystem,
        Error::InvalidOptions(_) | Error::OracleCap { .. } => AohfStatus::InvalidArgument,
        Error::Unconverged => AohfStatus::Unconverged,
        Error::FrontierDegeneracy { .. }
        | Error::PurificationFailed { .. }
        | Error::NotOrthonormal { .. }
        | Error::ImaginaryResidue { .. } => AohfStatus::Numerical,
    }
}

struct Failure(AohfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(AohfStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, records any failure and turns panics into [`AohfStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AohfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AohfStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("internal panic: {msg}"));
            AohfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(AohfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn box_system(system: AoSystem, out: &mut *mut AohfSystem) {
    *out = Box::into_raw(Box::new(AohfSystem { inner: system }));
}

/// Copies `values` into `buffer`, or reports the needed length in `needed`.
unsafe fn fill(
    values: &[f64],
    buffer: *mut f64,
    len: usize,
    needed: *mut usize,
) -> Result<(), Failure> {
    if let Some(n) = needed.as_mut() {
        *n = values.len();
    }
    if len < values.len() {
        return Err(Failure(
            AohfStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    if values.is_empty() {
        return Ok(());
    }
    if buffer.is_null() {
        return Err(null("buffer"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
    Ok(())
}

fn row_major(m: &aohf::linalg::Matrix) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aohf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null.
///
/// The pointer stays valid until the next `aohf_` call on the same thread.
#[no_mangle]
pub extern "C" fn aohf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses AOINTS text. Spatial input is expanded to spin orbitals.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aohf_system_from_str(
    text: *const c_char,
    out: *mut *mut AohfSystem,
) -> AohfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        box_system(parse_aoints(text)?.into_spin(), out);
        Ok(())
    })
}

/// Reads and parses an AOINTS file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aohf_system_from_file(
    path: *const c_char,
    out: *mut *mut AohfSystem,
) -> AohfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure(AohfStatus::Io, format!("cannot read {path}: {e}")))?;
        let system = parse_aoints(&text).map_err(|e| {
            let f = Failure::from(e);
            Failure(f.0, format!("{path}: {}", f.1))
        })?;
        box_system(system.into_spin(), out);
        Ok(())
    })
}

/// Seeded random system with `m` spin orbitals and `n` electrons.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aohf_system_random(
    m: usize,
    n: usize,
    seed: u64,
    overlap: f64,
    out: *mut *mut AohfSystem,
) -> AohfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        box_system(random_system(m, n, seed, overlap)?, out);
        Ok(())
    })
}

/// # Safety
/// `system` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn aohf_system_free(system: *mut AohfSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Number of spin orbitals, or 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aohf_system_size(system: *const AohfSystem) -> usize {
    system.as_ref().map_or(0, |s| s.inner.n_spin_orbitals())
}

/// Number of electrons, or 0 for a null handle.
///
/// # Safety
/// `system` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aohf_system_electrons(system: *const AohfSystem) -> usize {
    system.as_ref().map_or(0, |s| s.inner.n_electrons)
}

#[no_mangle]
pub extern "C" fn aohf_options_default() -> AohfOptions {
    let d = ScfOptions::default();
    AohfOptions {
        max_iterations: d.max_iterations,
        energy_tolerance: d.energy_tolerance,
        gradient_tolerance: d.gradient_tolerance,
        diis_depth: d.diis_depth,
        initial_step: d.initial_step,
    }
}

/// Runs a solver. An unconverged run still yields a solution with status
/// `Ok`; query [`aohf_solution_converged`].
///
/// # Safety
/// `system` must be a live handle, `options` null (defaults) or valid, and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aohf_solve(
    system: *const AohfSystem,
    solver: AohfSolver,
    options: *const AohfOptions,
    out: *mut *mut AohfSolution,
) -> AohfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let system = &system.as_ref().ok_or_else(|| null("system"))?.inner;
        let o = options
            .as_ref()
            .copied()
            .unwrap_or_else(|| aohf_options_default());
        let solver = match solver {
            AohfSolver::Roothaan => Solver::Roothaan,
            AohfSolver::DensityDescent => Solver::DensityDescent,
        };
        let options = ScfOptions {
            max_iterations: o.max_iterations,
            energy_tolerance: o.energy_tolerance,
            gradient_tolerance: o.gradient_tolerance,
            diis_depth: o.diis_depth,
            initial_step: o.initial_step,
            solver,
        };
        let inner = match solver {
            Solver::Roothaan => scf_roothaan(system, &options)?,
            Solver::DensityDescent => scf_density_descent(system, &options)?,
        };
        *out = Box::into_raw(Box::new(AohfSolution {
            inner,
            label: system.label.clone(),
        }));
        Ok(())
    })
}

/// # Safety
/// `solution` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_free(solution: *mut AohfSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Total energy, NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_energy(solution: *const AohfSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.inner.energy)
}

/// Final `max |FDS − SDF|`, NaN for a null handle.
///
/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_gradient(solution: *const AohfSolution) -> f64 {
    solution.as_ref().map_or(f64::NAN, |s| s.inner.gradient_max)
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_converged(solution: *const AohfSolution) -> bool {
    solution.as_ref().is_some_and(|s| s.inner.converged)
}

/// # Safety
/// `solution` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_iterations(solution: *const AohfSolution) -> usize {
    solution.as_ref().map_or(0, |s| s.inner.iterations)
}

/// Copies the `M×M` density into `buffer` (row-major). `needed`, if not
/// null, receives `M²` even when the buffer is too small.
///
/// # Safety
/// `solution` must be a live handle and `buffer` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_density(
    solution: *const AohfSolution,
    buffer: *mut f64,
    len: usize,
    needed: *mut usize,
) -> AohfStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        fill(&row_major(s.inner.density.matrix()), buffer, len, needed)
    })
}

/// Copies the `M` orbital energies into `buffer`: occupied first, then
/// virtual, each block in ascending order.
///
/// # Safety
/// `solution` must be a live handle and `buffer` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_orbital_energies(
    solution: *const AohfSolution,
    buffer: *mut f64,
    len: usize,
    needed: *mut usize,
) -> AohfStatus {
    guard(|| {
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        fill(&s.inner.orbital_energies, buffer, len, needed)
    })
}

/// Checks the Roothaan-Hall equivalence of a converged solution against the
/// system it was solved for. Unconverged solutions give `Unconverged`.
///
/// # Safety
/// Both handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_equivalence(
    solution: *const AohfSolution,
    system: *const AohfSystem,
    out: *mut AohfEquivalence,
) -> AohfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let sys = system.as_ref().ok_or_else(|| null("system"))?;
        if sys.inner.n_spin_orbitals() != s.inner.density.matrix().nrows() {
            return Err(Failure(
                AohfStatus::InvalidArgument,
                "solution and system differ in size".to_string(),
            ));
        }
        let r = verify_equivalence(&s.inner, &sys.inner)?;
        *out = AohfEquivalence {
            occupied_eigen_residual: r.occupied_eigen_residual,
            occupied_offdiagonal: r.occupied_offdiagonal,
            occupied_span_residual: r.occupied_span_residual,
            commutator_residual: r.commutator_residual,
            density_difference: r.density_difference,
            passed: r.passes(),
        };
        Ok(())
    })
}

/// The run report as JSON. Release the string with [`aohf_string_free`].
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aohf_solution_to_json(
    solution: *const AohfSolution,
    out: *mut *mut c_char,
) -> AohfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = solution.as_ref().ok_or_else(|| null("solution"))?;
        let json = report::to_json(&RunReport::new(&s.label, &s.inner, None));
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn aohf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
