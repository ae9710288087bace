use std::ffi::{CStr, CString};
use std::ptr;
use std::sync::Arc;

use fracsrc::fem::{assemble, FeField};
use fracsrc::forward::{Stepper, TemporalProfile, TimeGrid};
use fracsrc::fracops::{l1_weights, mittag_leffler, MLParams};
use fracsrc::inverse::InverseProblem;
use fracsrc::mesh::build_mesh;
use fracsrc_ffi::*;

fn last_error() -> String {
    let p = fracsrc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

struct Handle(*mut FracsrcProblem);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { fracsrc_problem_free(self.0) };
    }
}

fn make(dim: usize, n: usize, steps: usize, lo: Option<&[f64]>, hi: Option<&[f64]>) -> Handle {
    let mu: Vec<f64> = (0..=steps).map(|m| 5.0 + 10.0 * m as f64 / steps as f64).collect();
    let mut p = ptr::null_mut();
    let code = unsafe {
        fracsrc_problem_new(
            dim,
            n,
            steps,
            1.0,
            0.3,
            mu.as_ptr(),
            lo.map_or(ptr::null(), <[f64]>::as_ptr),
            hi.map_or(ptr::null(), <[f64]>::as_ptr),
            &mut p,
        )
    };
    assert_eq!(code, FRACSRC_OK, "{}", if code == FRACSRC_OK { String::new() } else { last_error() });
    assert!(!p.is_null());
    Handle(p)
}

#[test]
fn mittag_leffler_matches_core() {
    let mut v = 0.0;
    assert_eq!(unsafe { fracsrc_mittag_leffler(1.0, 1.0, -1.5, &mut v) }, FRACSRC_OK);
    assert!((v - (-1.5f64).exp()).abs() < 1e-12);
    assert_eq!(unsafe { fracsrc_mittag_leffler(0.4, 1.0, -0.7, &mut v) }, FRACSRC_OK);
    let want = mittag_leffler(&MLParams::two(0.4, 1.0), -0.7).unwrap();
    assert_eq!(v, want);
    assert!(fracsrc_last_error_message().is_null());
}

#[test]
fn null_output_is_validation_error() {
    assert_eq!(unsafe { fracsrc_mittag_leffler(0.5, 1.0, 0.0, ptr::null_mut()) }, FRACSRC_ERR_VALIDATION);
    assert!(last_error().contains("out"));
    let mut v = 0.0;
    assert_eq!(unsafe { fracsrc_mittag_leffler(0.0, 1.0, 0.0, &mut v) }, FRACSRC_ERR_VALIDATION);
}

#[test]
fn l1_weights_match_core() {
    let steps = 16;
    let mut d = vec![0.0; steps];
    let mut b0 = 0.0;
    assert_eq!(unsafe { fracsrc_l1_weights(0.3, 1.0 / 16.0, steps, d.as_mut_ptr(), &mut b0) }, FRACSRC_OK);
    let w = l1_weights(0.3, 1.0 / 16.0, steps).unwrap();
    assert_eq!(d, w.d());
    assert_eq!(b0, w.b0());
    assert_eq!(d[0], 1.0);
}

#[test]
fn handle_reports_sizes_and_nodes() {
    let h = make(2, 4, 6, None, None);
    unsafe {
        assert_eq!(fracsrc_problem_dofs(h.0), 25);
        assert_eq!(fracsrc_problem_steps(h.0), 6);
        let mut coords = vec![0.0; 50];
        assert_eq!(fracsrc_problem_nodes(h.0, coords.as_mut_ptr()), FRACSRC_OK);
        assert!(coords.iter().all(|c| (0.0..=1.0).contains(c)));
        assert_eq!(&coords[..2], &[0.0, 0.0]);
        assert_eq!(&coords[48..], &[1.0, 1.0]);
    }
}

#[test]
fn null_handle_is_rejected() {
    unsafe {
        assert_eq!(fracsrc_problem_dofs(ptr::null()), 0);
        let mut out = 0.0;
        assert_eq!(fracsrc_estimate_norm(ptr::null(), 5, 0, &mut out), FRACSRC_ERR_VALIDATION);
        fracsrc_problem_free(ptr::null_mut());
    }
}

#[test]
fn bad_construction_leaves_out_untouched() {
    let mu = [1.0; 5];
    let lo = [0.1];
    let mut p = ptr::null_mut();
    let code = unsafe { fracsrc_problem_new(1, 8, 4, 1.0, 0.3, mu.as_ptr(), lo.as_ptr(), ptr::null(), &mut p) };
    assert_eq!(code, FRACSRC_ERR_VALIDATION);
    assert!(p.is_null());
    assert!(last_error().contains("omega"));
    let code = unsafe { fracsrc_problem_new(1, 8, 4, 1.0, 1.5, mu.as_ptr(), ptr::null(), ptr::null(), &mut p) };
    assert_eq!(code, FRACSRC_ERR_VALIDATION);
    assert!(p.is_null());
}

#[test]
fn forward_matches_core() {
    let (n, steps) = (10, 8);
    let h = make(1, n, steps, None, None);
    let f: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64 * 3.0).sin()).collect();
    let mut traj = vec![f64::NAN; (steps + 1) * (n + 1)];
    assert_eq!(unsafe { fracsrc_forward(h.0, f.as_ptr(), traj.as_mut_ptr()) }, FRACSRC_OK);

    let space = Arc::new(assemble(build_mesh(1, n).unwrap()).unwrap());
    let grid = TimeGrid::new(1.0, steps, 0.3).unwrap();
    let stepper = Arc::new(Stepper::new(space, grid).unwrap());
    let mu = TemporalProfile((0..=steps).map(|m| 5.0 + 10.0 * m as f64 / steps as f64).collect());
    let u = InverseProblem::new(stepper, mu).unwrap().forward(&FeField(f)).unwrap();
    for (m, s) in u.slices().iter().enumerate() {
        assert_eq!(&traj[m * (n + 1)..(m + 1) * (n + 1)], s.coeffs());
    }
    assert!(traj[..n + 1].iter().all(|&x| x == 0.0));
}

#[test]
fn reconstruct_moves_toward_source_on_exact_data() {
    let (n, steps) = (10, 10);
    let h = make(1, n, steps, Some(&[0.1]), Some(&[0.9]));
    let dofs = n + 1;
    let f: Vec<f64> = (0..dofs).map(|i| 1.0 + (i as f64 / n as f64)).collect();
    let mut data = vec![0.0; (steps + 1) * dofs];
    let mut lambda = 0.0;
    unsafe {
        assert_eq!(fracsrc_forward(h.0, f.as_ptr(), data.as_mut_ptr()), FRACSRC_OK);
        assert_eq!(fracsrc_estimate_norm(h.0, 40, 7, &mut lambda), FRACSRC_OK);
    }
    assert!(lambda > 0.0);
    let f0 = vec![0.5; dofs];
    let mut out = vec![0.0; dofs];
    let mut iters = 0usize;
    let code = unsafe {
        fracsrc_reconstruct(h.0, data.as_ptr(), 0.0, 1.1 * lambda, 1e-4, 5000, f0.as_ptr(), out.as_mut_ptr(), &mut iters)
    };
    assert_eq!(code, FRACSRC_OK);
    assert!(iters > 1);
    let dist = |g: &[f64]| g.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    assert!(dist(&out) < 0.1 * dist(&f0), "{} vs {}", dist(&out), dist(&f0));

    let code = unsafe {
        fracsrc_reconstruct(h.0, data.as_ptr(), 0.0, 1.1 * lambda, 1e-12, 2, f0.as_ptr(), out.as_mut_ptr(), &mut iters)
    };
    assert_eq!(code, FRACSRC_NOT_CONVERGED);
    assert_eq!(iters, 2);
}

#[test]
fn run_experiment_by_id() {
    let id = CString::new("1d-b").unwrap();
    let (mut err, mut k) = (0.0, 0usize);
    let code = unsafe { fracsrc_run_experiment(id.as_ptr(), ptr::null(), &mut err, &mut k) };
    assert_eq!(code, FRACSRC_OK);
    assert!(err > 0.0 && err < 0.1, "{err}");
    assert!(k >= 1);

    let seed = 5u64;
    let (mut err2, mut k2) = (0.0, 0usize);
    let code = unsafe { fracsrc_run_experiment(id.as_ptr(), &seed, &mut err2, &mut k2) };
    assert_eq!(code, FRACSRC_OK);
    assert_ne!(err, err2);

    let bad = CString::new("no-such-run").unwrap();
    let code = unsafe { fracsrc_run_experiment(bad.as_ptr(), ptr::null(), &mut err, &mut k) };
    assert_eq!(code, FRACSRC_ERR_VALIDATION);
    assert!(last_error().contains("no-such-run"));
}
