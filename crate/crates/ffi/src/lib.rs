//! C ABI over `jacobi-flow`.
//!
//! Every function returns a [`JfStatus`] (or a plain value for infallible
//! queries) and writes results through out-pointers. Objects are opaque
//! handles created by `jf_*_new`-style calls and released with the matching
//! `jf_*_free`. On failure a message is kept per thread and can be read with
//! [`jf_last_error`]. Panics are caught at the boundary and reported as
//! [`JfStatus::Panic`].
//!
//! Arrays are caller-owned: `x`, `p` have length `n`, matrices are `n × n`
//! row-major.
//!
//! Safety contract shared by every `unsafe` entry point: pointers are either
//! null (reported as `JF_STATUS_NULL_POINTER`) or valid for the stated
//! length, handles come from this library and are freed at most once, and
//! strings are NUL-terminated.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use jacobi_flow::catalog::{self, CatalogEntry};
use jacobi_flow::curvature::{self, ConformalProfile, OrbitClass};
use jacobi_flow::flow::{
    self, compare_paths, compare_paths_with, integrate, Direction, FlowState, HamiltonFlow, IntegrateOptions,
    JacobiFlow, PlanarChart, Termination, Trajectory,
};
use jacobi_flow::jacobi::{jacobi_nonrelativistic, MechanicalSystem};
use jacobi_flow::metric::Matrix;
use jacobi_flow::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JfStatus {
    Ok = 0,
    NullPointer = 1,
    DomainViolation = 2,
    SingularMatrix = 3,
    TurningPoint = 4,
    StepFailure = 5,
    Pole = 6,
    DimensionMismatch = 7,
    InvalidInput = 8,
    EmptyTrajectory = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JfTermination {
    Completed = 0,
    TurningPoint = 1,
    DomainViolation = 2,
    StepFailure = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JfFlowKind {
    Hamilton = 0,
    Jacobi = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JfChart {
    None = 0,
    Cartesian = 1,
    Polar = 2,
    Spherical = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JfOrbitClass {
    Ellipse = 0,
    Parabola = 1,
    Hyperbola = 2,
}

/// A catalog entry.
pub struct JfCatalog {
    entry: CatalogEntry,
}

/// A mechanical system `(g, U, m, E)`.
pub struct JfSystem {
    sys: MechanicalSystem,
}

/// An integrated trajectory.
pub struct JfTrajectory {
    traj: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> JfStatus {
    match e {
        Error::DomainViolation(_) => JfStatus::DomainViolation,
        Error::SingularMatrix(_) => JfStatus::SingularMatrix,
        Error::TurningPoint { .. } => JfStatus::TurningPoint,
        Error::StepFailure { .. } => JfStatus::StepFailure,
        Error::EmptyTrajectory => JfStatus::EmptyTrajectory,
        Error::PoleAtZeroDenominator(_) => JfStatus::Pole,
        Error::DimensionMismatch { .. } => JfStatus::DimensionMismatch,
        Error::InvalidInput(_) => JfStatus::InvalidInput,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, recording the error message and turning panics into a status.
fn guard<F>(f: F) -> JfStatus
where
    F: FnOnce() -> Result<(), Fail>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => JfStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            JfStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            JfStatus::Panic
        }
    }
}

unsafe fn slice<'a>(ptr: *const f64, n: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, n))
}

unsafe fn slice_mut<'a>(ptr: *mut f64, n: usize, what: &'static str) -> Result<&'a mut [f64], Fail> {
    if n == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, n))
}

unsafe fn out<'a, T>(ptr: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or(Fail::Null(what))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Fail> {
    ptr.as_ref().ok_or(Fail::Null(what))
}

fn write_matrix(m: &Matrix, dst: &mut [f64]) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            dst[i * n + j] = m[(i, j)];
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), Fail> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got }.into())
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn jf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn jf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- curvature ----

/// Closed-form Gaussian curvature of the Kepler Jacobi metric `(E + k/r)(dr² + r²dφ²)`.
#[no_mangle]
pub unsafe extern "C" fn jf_kepler_curvature(k: f64, energy: f64, r: f64, out_k: *mut f64) -> JfStatus {
    guard(|| {
        *out(out_k, "out_k")? = curvature::kepler_curvature(k, energy, r)?;
        Ok(())
    })
}

/// The same curvature by finite differences of the conformal factor.
#[no_mangle]
pub unsafe extern "C" fn jf_kepler_curvature_numeric(k: f64, energy: f64, r: f64, out_k: *mut f64) -> JfStatus {
    guard(|| {
        *out(out_k, "out_k")? = curvature::gaussian_curvature_numeric(&ConformalProfile::kepler(k, energy), r)?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn jf_classify_orbit(energy: f64) -> JfOrbitClass {
    match curvature::classify_orbit(energy) {
        OrbitClass::Ellipse => JfOrbitClass::Ellipse,
        OrbitClass::Parabola => JfOrbitClass::Parabola,
        OrbitClass::Hyperbola => JfOrbitClass::Hyperbola,
    }
}

#[no_mangle]
pub unsafe extern "C" fn jf_eccentricity(
    energy: f64,
    angular_momentum: f64,
    mass: f64,
    k: f64,
    out_e: *mut f64,
) -> JfStatus {
    guard(|| {
        *out(out_e, "out_e")? = curvature::eccentricity(energy, angular_momentum, mass, k)?;
        Ok(())
    })
}

// ---- catalog ----

/// Builds a catalog entry by name from `n` key/value pairs; unset keys take
/// their defaults.
#[no_mangle]
pub unsafe extern "C" fn jf_catalog_new(
    name: *const c_char,
    keys: *const *const c_char,
    values: *const f64,
    n: usize,
    out_handle: *mut *mut JfCatalog,
) -> JfStatus {
    guard(|| {
        let dst = out(out_handle, "out_handle")?;
        *dst = ptr::null_mut();
        if name.is_null() {
            return Err(Fail::Null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Error::InvalidInput("name is not UTF-8".into()))?;
        let vals = slice(values, n, "values")?;
        let mut params = BTreeMap::new();
        if n > 0 && keys.is_null() {
            return Err(Fail::Null("keys"));
        }
        for (i, v) in vals.iter().enumerate() {
            let key = *keys.add(i);
            if key.is_null() {
                return Err(Fail::Null("keys[i]"));
            }
            let key = CStr::from_ptr(key)
                .to_str()
                .map_err(|_| Error::InvalidInput("key is not UTF-8".into()))?;
            params.insert(key.to_string(), *v);
        }
        let entry = catalog::by_name(name, &params)?;
        *dst = Box::into_raw(Box::new(JfCatalog { entry }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn jf_catalog_free(handle: *mut JfCatalog) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Spatial dimension, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn jf_catalog_dim(handle: *const JfCatalog) -> usize {
    handle.as_ref().map_or(0, |h| h.entry.dim())
}

/// Generic non-relativistic Jacobi metric `2m(E − U) g` at `x`.
#[no_mangle]
pub unsafe extern "C" fn jf_catalog_jacobi_nonrelativistic(
    handle: *const JfCatalog,
    x: *const f64,
    n: usize,
    energy: f64,
    out_matrix: *mut f64,
) -> JfStatus {
    catalog_matrix(handle, x, n, out_matrix, |e, x| e.generic_nonrelativistic(x, energy))
}

/// Generic relativistic Jacobi metric at energy `ℰ` (or `𝒬` for Euclidean entries).
#[no_mangle]
pub unsafe extern "C" fn jf_catalog_jacobi_relativistic(
    handle: *const JfCatalog,
    x: *const f64,
    n: usize,
    energy: f64,
    out_matrix: *mut f64,
) -> JfStatus {
    catalog_matrix(handle, x, n, out_matrix, |e, x| e.generic_relativistic(x, energy))
}

/// Closed-form relativistic Jacobi metric of the entry.
#[no_mangle]
pub unsafe extern "C" fn jf_catalog_printed_relativistic(
    handle: *const JfCatalog,
    x: *const f64,
    n: usize,
    energy: f64,
    out_matrix: *mut f64,
) -> JfStatus {
    catalog_matrix(handle, x, n, out_matrix, |e, x| {
        e.relativistic_reference(x, energy).map(|p| p.matrix())
    })
}

unsafe fn catalog_matrix<F>(handle: *const JfCatalog, x: *const f64, n: usize, out_matrix: *mut f64, f: F) -> JfStatus
where
    F: FnOnce(&CatalogEntry, &[f64]) -> jacobi_flow::Result<Matrix>,
{
    guard(|| {
        let h = handle_ref(handle)?;
        check_dim(h.entry.dim(), n)?;
        let x = slice(x, n, "x")?;
        let dst = slice_mut(out_matrix, n * n, "out_matrix")?;
        write_matrix(&f(&h.entry, x)?, dst);
        Ok(())
    })
}

unsafe fn handle_ref<'a>(h: *const JfCatalog) -> Result<&'a JfCatalog, Fail> {
    handle(h, "catalog handle")
}

/// The entry's non-relativistic system at energy `E`.
#[no_mangle]
pub unsafe extern "C" fn jf_catalog_system(
    handle: *const JfCatalog,
    energy: f64,
    out_system: *mut *mut JfSystem,
) -> JfStatus {
    guard(|| {
        let dst = out(out_system, "out_system")?;
        *dst = ptr::null_mut();
        let sys = handle_ref(handle)?.entry.mechanical(energy)?;
        *dst = Box::into_raw(Box::new(JfSystem { sys }));
        Ok(())
    })
}

// ---- systems ----

/// Planar Kepler system `U = −k/r` in polar coordinates.
#[no_mangle]
pub unsafe extern "C" fn jf_system_kepler(k: f64, mass: f64, energy: f64, out_system: *mut *mut JfSystem) -> JfStatus {
    guard(|| {
        let dst = out(out_system, "out_system")?;
        *dst = ptr::null_mut();
        let sys = catalog::kepler(k, mass, 1.0)?.mechanical(energy)?;
        *dst = Box::into_raw(Box::new(JfSystem { sys }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn jf_system_free(system: *mut JfSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

#[no_mangle]
pub unsafe extern "C" fn jf_system_dim(system: *const JfSystem) -> usize {
    system.as_ref().map_or(0, |s| s.sys.dim())
}

/// Energy of the system, NaN for NULL.
#[no_mangle]
pub unsafe extern "C" fn jf_system_energy(system: *const JfSystem) -> f64 {
    system.as_ref().map_or(f64::NAN, |s| s.sys.energy())
}

/// Sets `E` to the Hamiltonian at `(x, p)`.
#[no_mangle]
pub unsafe extern "C" fn jf_system_set_energy_from(
    system: *mut JfSystem,
    x: *const f64,
    p: *const f64,
    n: usize,
) -> JfStatus {
    guard(|| {
        let s = system.as_mut().ok_or(Fail::Null("system"))?;
        check_dim(s.sys.dim(), n)?;
        let (x, p) = (slice(x, n, "x")?, slice(p, n, "p")?);
        s.sys = s.sys.clone().with_energy_from(x, p)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn jf_system_hamiltonian(
    system: *const JfSystem,
    x: *const f64,
    p: *const f64,
    n: usize,
    out_h: *mut f64,
) -> JfStatus {
    guard(|| {
        let s = &handle(system, "system")?.sys;
        check_dim(s.dim(), n)?;
        *out(out_h, "out_h")? = s.hamiltonian(slice(x, n, "x")?, slice(p, n, "p")?, 0.0)?;
        Ok(())
    })
}

/// Conformal factor `2m(E − U)` at `x`.
#[no_mangle]
pub unsafe extern "C" fn jf_system_jacobi_factor(
    system: *const JfSystem,
    x: *const f64,
    n: usize,
    out_factor: *mut f64,
) -> JfStatus {
    guard(|| {
        let s = &handle(system, "system")?.sys;
        check_dim(s.dim(), n)?;
        *out(out_factor, "out_factor")? = jacobi_nonrelativistic(s).factor_at(slice(x, n, "x")?, 0.0)?;
        Ok(())
    })
}

unsafe fn system_rhs<F>(
    system: *const JfSystem,
    x: *const f64,
    p: *const f64,
    n: usize,
    dx: *mut f64,
    dp: *mut f64,
    f: F,
) -> JfStatus
where
    F: FnOnce(&MechanicalSystem, &[f64], &[f64]) -> jacobi_flow::Result<(Vec<f64>, Vec<f64>)>,
{
    guard(|| {
        let s = &handle(system, "system")?.sys;
        check_dim(s.dim(), n)?;
        let (vx, vp) = f(s, slice(x, n, "x")?, slice(p, n, "p")?)?;
        slice_mut(dx, n, "dx")?.copy_from_slice(&vx);
        slice_mut(dp, n, "dp")?.copy_from_slice(&vp);
        Ok(())
    })
}

/// Hamilton's equations `(dx/dt, dp/dt)`.
#[no_mangle]
pub unsafe extern "C" fn jf_system_hamilton_rhs(
    system: *const JfSystem,
    x: *const f64,
    p: *const f64,
    n: usize,
    dx: *mut f64,
    dp: *mut f64,
) -> JfStatus {
    system_rhs(system, x, p, n, dx, dp, flow::hamilton_rhs)
}

/// Jacobi-parameter equations `(dx/ds, dp/ds)`.
#[no_mangle]
pub unsafe extern "C" fn jf_system_jacobi_rhs(
    system: *const JfSystem,
    x: *const f64,
    p: *const f64,
    n: usize,
    dx: *mut f64,
    dp: *mut f64,
) -> JfStatus {
    system_rhs(system, x, p, n, dx, dp, flow::jacobi_rhs)
}

// ---- integration ----

/// Integrates from `(x0, p0)` over `span` (time for Hamilton, Jacobi `s`
/// otherwise). `max_step <= 0` leaves the step unbounded. A run that stops
/// early still returns `Ok`; query [`jf_trajectory_termination`].
#[no_mangle]
pub unsafe extern "C" fn jf_integrate(
    system: *const JfSystem,
    kind: JfFlowKind,
    chart: JfChart,
    x0: *const f64,
    p0: *const f64,
    n: usize,
    span: f64,
    rtol: f64,
    atol: f64,
    max_step: f64,
    out_trajectory: *mut *mut JfTrajectory,
) -> JfStatus {
    guard(|| {
        let dst = out(out_trajectory, "out_trajectory")?;
        *dst = ptr::null_mut();
        let s = &handle(system, "system")?.sys;
        check_dim(s.dim(), n)?;
        let init = FlowState::new(0.0, slice(x0, n, "x0")?.to_vec(), slice(p0, n, "p0")?.to_vec())?;
        let mut opts = IntegrateOptions::default().with_tolerances(rtol, atol);
        if max_step > 0.0 {
            opts = opts.with_max_step(max_step);
        }
        let chart = match chart {
            JfChart::None => None,
            JfChart::Cartesian => Some(PlanarChart::Cartesian),
            JfChart::Polar => Some(PlanarChart::Polar),
            JfChart::Spherical => Some(PlanarChart::Spherical),
        };
        let traj = match kind {
            JfFlowKind::Hamilton => {
                let mut f = HamiltonFlow::new(s.clone());
                f.chart = chart;
                integrate(&f, &init, span, &opts)?
            }
            JfFlowKind::Jacobi => {
                let mut f = JacobiFlow::new(s.clone());
                f.chart = chart;
                integrate(&f, &init, span, &opts)?
            }
        };
        *dst = Box::into_raw(Box::new(JfTrajectory { traj }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn jf_trajectory_free(trajectory: *mut JfTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Number of recorded states, 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn jf_trajectory_len(trajectory: *const JfTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.traj.len())
}

#[no_mangle]
pub unsafe extern "C" fn jf_trajectory_dim(trajectory: *const JfTrajectory) -> usize {
    trajectory
        .as_ref()
        .and_then(|t| t.traj.first())
        .map_or(0, FlowState::dim)
}

#[no_mangle]
pub unsafe extern "C" fn jf_trajectory_termination(
    trajectory: *const JfTrajectory,
    out_termination: *mut JfTermination,
) -> JfStatus {
    guard(|| {
        let t = handle(trajectory, "trajectory")?;
        *out(out_termination, "out_termination")? = match t.traj.termination() {
            Termination::Completed => JfTermination::Completed,
            Termination::TurningPoint => JfTermination::TurningPoint,
            Termination::DomainViolation => JfTermination::DomainViolation,
            Termination::StepFailure => JfTermination::StepFailure,
        };
        Ok(())
    })
}

/// Copies state `index`: its parameter, `x` and `p` (each of length `n`).
#[no_mangle]
pub unsafe extern "C" fn jf_trajectory_state(
    trajectory: *const JfTrajectory,
    index: usize,
    out_param: *mut f64,
    out_x: *mut f64,
    out_p: *mut f64,
    n: usize,
) -> JfStatus {
    guard(|| {
        let t = handle(trajectory, "trajectory")?;
        let s = t
            .traj
            .states()
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("index {index} out of range (len {})", t.traj.len())))?;
        check_dim(s.dim(), n)?;
        *out(out_param, "out_param")? = s.param;
        slice_mut(out_x, n, "out_x")?.copy_from_slice(&s.x);
        slice_mut(out_p, n, "out_p")?.copy_from_slice(&s.p);
        Ok(())
    })
}

/// Named monitor (e.g. `"energy"`, `"H_tilde"`, `"clairaut"`) at state `index`.
#[no_mangle]
pub unsafe extern "C" fn jf_trajectory_monitor(
    trajectory: *const JfTrajectory,
    index: usize,
    name: *const c_char,
    out_value: *mut f64,
) -> JfStatus {
    guard(|| {
        let t = handle(trajectory, "trajectory")?;
        if name.is_null() {
            return Err(Fail::Null("name"));
        }
        let name = CStr::from_ptr(name).to_string_lossy();
        let s = t
            .traj
            .states()
            .get(index)
            .ok_or_else(|| Error::InvalidInput(format!("index {index} out of range (len {})", t.traj.len())))?;
        *out(out_value, "out_value")? = s
            .monitor(&name)
            .ok_or_else(|| Error::InvalidInput(format!("no monitor named '{name}'")))?;
        Ok(())
    })
}

/// Relabels a time-parametrized trajectory by the Jacobi parameter `s`.
#[no_mangle]
pub unsafe extern "C" fn jf_trajectory_to_jacobi(
    trajectory: *const JfTrajectory,
    system: *const JfSystem,
    out_trajectory: *mut *mut JfTrajectory,
) -> JfStatus {
    guard(|| {
        let dst = out(out_trajectory, "out_trajectory")?;
        *dst = ptr::null_mut();
        let t = handle(trajectory, "trajectory")?;
        let s = handle(system, "system")?;
        let traj = flow::reparametrize(&t.traj, Direction::TToS, &s.sys)?;
        *dst = Box::into_raw(Box::new(JfTrajectory { traj }));
        Ok(())
    })
}

/// Largest distance between arc-length-resampled configuration paths. With
/// `polar` set, `(r, φ)` points are compared in Cartesian form.
#[no_mangle]
pub unsafe extern "C" fn jf_compare_paths(
    a: *const JfTrajectory,
    b: *const JfTrajectory,
    polar: bool,
    out_deviation: *mut f64,
) -> JfStatus {
    guard(|| {
        let (a, b) = (handle(a, "a")?, handle(b, "b")?);
        let d = if polar {
            compare_paths_with(&a.traj, &b.traj, |x| vec![x[0] * x[1].cos(), x[0] * x[1].sin()])?
        } else {
            compare_paths(&a.traj, &b.traj)?
        };
        *out(out_deviation, "out_deviation")? = d;
        Ok(())
    })
}
