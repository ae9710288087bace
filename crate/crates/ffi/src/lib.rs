//! C interface to `fracsrc`.
//!
//! Every fallible function returns a status code (`FRACSRC_OK` on success)
//! and writes its results through caller-provided pointers. On failure the
//! message is kept per thread and can be read with
//! [`fracsrc_last_error_message`]. Panics never cross the boundary; they are
//! reported as `FRACSRC_ERR_PANIC`.
//!
//! Trajectories are flattened slice by slice: entry `m * dofs + i` is node
//! `i` at time `t_m`, for `m = 0..=steps`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use fracsrc::error::ErrorKind;
use fracsrc::fem::{assemble, omega_mass, BoxComplement, FeField, FemSpace, SubdomainMask};
use fracsrc::forward::{Stepper, TemporalProfile, TimeGrid};
use fracsrc::fracops::{l1_weights, mittag_leffler, MLParams};
use fracsrc::harness::{registry, run_experiment};
use fracsrc::inverse::{InverseConfig, InverseProblem, Observation};
use fracsrc::mesh::build_mesh;
use fracsrc::Error;

pub const FRACSRC_OK: i32 = 0;
pub const FRACSRC_ERR_VALIDATION: i32 = 1;
pub const FRACSRC_ERR_NUMERICAL: i32 = 2;
/// The iteration cap was reached; outputs are still written.
pub const FRACSRC_NOT_CONVERGED: i32 = 3;
pub const FRACSRC_ERR_IO: i32 = 4;
pub const FRACSRC_ERR_PANIC: i32 = 5;

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

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn fracsrc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

fn invalid(field: &'static str, reason: &str) -> Error {
    Error::Invalid {
        field,
        reason: reason.to_string(),
    }
}

fn status(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Validation => FRACSRC_ERR_VALIDATION,
        ErrorKind::Numerical => FRACSRC_ERR_NUMERICAL,
        ErrorKind::NotConverged => FRACSRC_NOT_CONVERGED,
        ErrorKind::Io => FRACSRC_ERR_IO,
    }
}

fn guard(f: impl FnOnce() -> Result<i32, Error>) -> i32 {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            let code = status(e.kind());
            set_last_error(e.to_string());
            code
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            FRACSRC_ERR_PANIC
        }
    }
}

/// # Safety
/// `p` must be null or valid for `len` reads.
unsafe fn input<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Error> {
    if p.is_null() {
        return Err(invalid(what, "null pointer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or valid for `len` writes.
unsafe fn output<'a>(p: *mut f64, len: usize, what: &'static str) -> Result<&'a mut [f64], Error> {
    if p.is_null() {
        return Err(invalid(what, "null pointer"));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(p: *mut T, v: T, what: &'static str) -> Result<(), Error> {
    if p.is_null() {
        return Err(invalid(what, "null pointer"));
    }
    p.write(v);
    Ok(())
}

/// `E_{α,β}(z)` by its power series.
///
/// # Safety
/// `out` must be null or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_mittag_leffler(alpha: f64, beta: f64, z: f64, out: *mut f64) -> i32 {
    guard(|| {
        let v = mittag_leffler(&MLParams::two(alpha, beta), z)?;
        put(out, v, "out")?;
        Ok(FRACSRC_OK)
    })
}

/// L1 weights `d_0 .. d_{steps-1}` into `d_out` (length `steps`) and `b0` into `b0_out`.
///
/// # Safety
/// `d_out` must be null or valid for `steps` writes, `b0_out` for one.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_l1_weights(alpha: f64, tau: f64, steps: usize, d_out: *mut f64, b0_out: *mut f64) -> i32 {
    guard(|| {
        let w = l1_weights(alpha, tau, steps)?;
        output(d_out, steps, "d_out")?.copy_from_slice(w.d());
        put(b0_out, w.b0(), "b0_out")?;
        Ok(FRACSRC_OK)
    })
}

/// Forward model on `(0,1)^dim` with a sampled temporal factor and an
/// observation region.
pub struct FracsrcProblem {
    space: Arc<FemSpace>,
    problem: InverseProblem,
    mask: Arc<SubdomainMask>,
}

/// Builds a problem handle.
///
/// `mu` holds `μ(t_0) .. μ(t_steps)` (length `steps + 1`). The observation
/// region is the unit cube minus the box `[lo_k, hi_k]`; pass null for both
/// bounds to observe everywhere, otherwise each must hold `dim` values.
///
/// # Safety
/// Pointers must be null or valid for the stated lengths; `out` receives a
/// handle to release with [`fracsrc_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn fracsrc_problem_new(
    dim: usize,
    n: usize,
    steps: usize,
    t_final: f64,
    alpha: f64,
    mu: *const f64,
    omega_lo: *const f64,
    omega_hi: *const f64,
    out: *mut *mut FracsrcProblem,
) -> i32 {
    guard(|| {
        if out.is_null() {
            return Err(invalid("out", "null pointer"));
        }
        let space = Arc::new(assemble(build_mesh(dim, n)?)?);
        let grid = TimeGrid::new(t_final, steps, alpha)?;
        let stepper = Arc::new(Stepper::new(space.clone(), grid)?);
        let mu = TemporalProfile(input(mu, steps + 1, "mu")?.to_vec());
        let problem = InverseProblem::new(stepper, mu)?;
        let spec = match (omega_lo.is_null(), omega_hi.is_null()) {
            (true, true) => BoxComplement::full(),
            (false, false) => BoxComplement::boxed(
                input(omega_lo, dim, "omega_lo")?.to_vec(),
                input(omega_hi, dim, "omega_hi")?.to_vec(),
            ),
            _ => return Err(invalid("omega", "give both bounds or neither")),
        };
        let mask = Arc::new(omega_mass(&space, &spec)?);
        let handle = Box::new(FracsrcProblem { space, problem, mask });
        *out = Box::into_raw(handle);
        Ok(FRACSRC_OK)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `p` must come from [`fracsrc_problem_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_problem_free(p: *mut FracsrcProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn handle<'a>(p: *const FracsrcProblem) -> Result<&'a FracsrcProblem, Error> {
    p.as_ref().ok_or_else(|| invalid("problem", "null handle"))
}

/// Number of mesh nodes; 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_problem_dofs(p: *const FracsrcProblem) -> usize {
    p.as_ref().map_or(0, |h| h.space.dof_count())
}

/// Number of time steps `M`; 0 for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_problem_steps(p: *const FracsrcProblem) -> usize {
    p.as_ref().map_or(0, |h| h.problem.stepper().grid().steps())
}

/// Node coordinates in node order, `dim` values per node, into `coords_out`
/// (length `dofs * dim`).
///
/// # Safety
/// `p` must be a live handle and `coords_out` valid for the stated length.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_problem_nodes(p: *const FracsrcProblem, coords_out: *mut f64) -> i32 {
    guard(|| {
        let h = handle(p)?;
        let dim = h.space.dim();
        let out = output(coords_out, h.space.dof_count() * dim, "coords_out")?;
        for (i, x) in h.space.mesh().nodes().enumerate() {
            out[i * dim..(i + 1) * dim].copy_from_slice(x);
        }
        Ok(FRACSRC_OK)
    })
}

/// Solves the forward problem for nodal source `f` (length `dofs`) into
/// `traj_out` (length `(steps + 1) * dofs`).
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_forward(p: *const FracsrcProblem, f: *const f64, traj_out: *mut f64) -> i32 {
    guard(|| {
        let h = handle(p)?;
        let dofs = h.space.dof_count();
        let steps = h.problem.stepper().grid().steps();
        let f = FeField(input(f, dofs, "f")?.to_vec());
        let u = h.problem.forward(&f)?;
        let out = output(traj_out, (steps + 1) * dofs, "traj_out")?;
        for (m, s) in u.slices().iter().enumerate() {
            out[m * dofs..(m + 1) * dofs].copy_from_slice(s.coeffs());
        }
        Ok(FRACSRC_OK)
    })
}

/// Power-iteration estimate of the largest eigenvalue of the normal operator.
///
/// # Safety
/// `p` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_estimate_norm(p: *const FracsrcProblem, iters: usize, seed: u64, out: *mut f64) -> i32 {
    guard(|| {
        let h = handle(p)?;
        let v = h.problem.estimate_l(&h.mask, iters, seed)?;
        put(out, v, "out")?;
        Ok(FRACSRC_OK)
    })
}

/// Reconstructs the source from observation data `data` (length
/// `(steps + 1) * dofs`) starting at `f0` (length `dofs`). The result goes
/// to `f_out` (length `dofs`) and the number of updates to `iterations_out`.
/// Returns `FRACSRC_NOT_CONVERGED` if `max_iters` ran out; outputs are still
/// written in that case.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_reconstruct(
    p: *const FracsrcProblem,
    data: *const f64,
    beta: f64,
    l: f64,
    eps: f64,
    max_iters: usize,
    f0: *const f64,
    f_out: *mut f64,
    iterations_out: *mut usize,
) -> i32 {
    guard(|| {
        let h = handle(p)?;
        let dofs = h.space.dof_count();
        let steps = h.problem.stepper().grid().steps();
        let data = input(data, (steps + 1) * dofs, "data")?;
        let slices = data.chunks(dofs).map(<[f64]>::to_vec).collect();
        let obs = Observation::new(slices, h.mask.clone(), 0.0);
        let cfg = InverseConfig {
            beta,
            l,
            eps,
            max_iters,
            f0: FeField(input(f0, dofs, "f0")?.to_vec()),
        };
        let res = h.problem.reconstruct(&obs, &cfg, None)?;
        output(f_out, dofs, "f_out")?.copy_from_slice(res.f_rec.coeffs());
        put(iterations_out, res.iterations, "iterations_out")?;
        Ok(if res.converged { FRACSRC_OK } else { FRACSRC_NOT_CONVERGED })
    })
}

/// Runs a registered experiment by id and reports its relative error and
/// iteration count. A non-null `seed` overrides the registered seed.
///
/// # Safety
/// `id` must be a NUL-terminated string; other pointers null or valid.
#[no_mangle]
pub unsafe extern "C" fn fracsrc_run_experiment(
    id: *const c_char,
    seed: *const u64,
    err_out: *mut f64,
    iterations_out: *mut usize,
) -> i32 {
    guard(|| {
        if id.is_null() {
            return Err(invalid("id", "null pointer"));
        }
        let id = CStr::from_ptr(id)
            .to_str()
            .map_err(|_| invalid("id", "not UTF-8"))?;
        let mut cfg = registry::find(id)?.config;
        if let Some(s) = seed.as_ref() {
            cfg.seed = *s;
        }
        let run = run_experiment(&cfg)?;
        put(err_out, run.record.err, "err_out")?;
        put(iterations_out, run.record.k, "iterations_out")?;
        Ok(if run.record.converged { FRACSRC_OK } else { FRACSRC_NOT_CONVERGED })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_match_error_kinds() {
        for kind in [
            ErrorKind::Validation,
            ErrorKind::Numerical,
            ErrorKind::NotConverged,
            ErrorKind::Io,
        ] {
            assert_eq!(status(kind), kind as i32);
        }
        assert_ne!(FRACSRC_ERR_PANIC, FRACSRC_OK);
    }

    #[test]
    fn panic_is_contained() {
        let code = guard(|| panic!("boom"));
        assert_eq!(code, FRACSRC_ERR_PANIC);
        let msg = unsafe { CStr::from_ptr(fracsrc_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("boom"));
    }
}
