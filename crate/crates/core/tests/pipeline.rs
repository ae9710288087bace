use std::sync::Arc;

use proptest::prelude::*;

use fracsrc::fem::{assemble, omega_mass, BoxComplement, FeField};
use fracsrc::forward::{Stepper, TemporalProfile, TimeGrid};
use fracsrc::harness::config::{parse_configs, to_json};
use fracsrc::harness::experiment::setup;
use fracsrc::harness::{registry, run_experiment, run_sweep};
use fracsrc::inverse::{InverseConfig, InverseProblem, Observation};
use fracsrc::mesh::build_mesh;

#[test]
fn registry_survives_json_round_trip() {
    let configs: Vec<_> = registry::entries().into_iter().map(|e| e.config).collect();
    let back = parse_configs(&to_json(&configs)).unwrap();
    assert_eq!(back, configs);
    for (a, b) in configs.iter().zip(&back) {
        assert_eq!(a.hash(), b.hash());
    }
    let mut hashes: Vec<_> = configs.iter().map(|c| c.hash()).collect();
    hashes.sort();
    hashes.dedup();
    assert_eq!(hashes.len(), configs.len());
}

#[test]
fn sweep_matches_single_runs() {
    let configs = registry::resolve("1d").unwrap();
    let swept = run_sweep(&configs);
    for (cfg, run) in configs.iter().zip(swept) {
        let run = run.unwrap();
        let single = run_experiment(cfg).unwrap();
        assert_eq!(run.record.id, cfg.id);
        assert_eq!(run.f_rec, single.f_rec);
        assert_eq!(run.record.objective_trace, single.record.objective_trace);
    }
}

#[test]
fn observation_has_expected_shape() {
    let cfg = registry::find("2d-a").unwrap().config;
    let s = setup(&cfg).unwrap();
    let obs = s.observe().unwrap();
    assert_eq!(obs.slices().len(), cfg.m + 1);
    assert!(obs.slices().iter().all(|v| v.len() == (cfg.n + 1) * (cfg.n + 1)));
    assert!(obs.slices()[0].iter().all(|&x| x == 0.0));
}

#[test]
fn smaller_tolerance_does_not_worsen_noiseless_recovery() {
    let space = Arc::new(assemble(build_mesh(1, 20).unwrap()).unwrap());
    let stepper = Arc::new(Stepper::new(space.clone(), TimeGrid::new(1.0, 20, 0.5).unwrap()).unwrap());
    let mu = TemporalProfile::sample(stepper.grid(), |t| 5.0 + 10.0 * t);
    let problem = InverseProblem::new(stepper, mu).unwrap();
    let mask = Arc::new(omega_mass(&space, &BoxComplement::full()).unwrap());
    let truth = space.l2_project(|x| 1.0 + x[0] * x[0]).unwrap();
    let obs = Observation::from_trajectory(&problem.forward(&truth).unwrap(), mask.clone(), 0.0);
    let l = 1.1 * problem.estimate_l(&mask, 40, 1).unwrap();
    let mut errs = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let cfg = InverseConfig {
            beta: 0.0,
            l,
            eps,
            max_iters: 20_000,
            f0: FeField::constant(space.dof_count(), 2.0),
        };
        let r = problem.reconstruct(&obs, &cfg, Some(&truth)).unwrap();
        assert!(r.converged);
        errs.push(r.err.unwrap());
    }
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn forward_map_is_linear(a in -2.0..2.0f64, b in -2.0..2.0f64, k in 1usize..4) {
        let space = Arc::new(assemble(build_mesh(1, 8).unwrap()).unwrap());
        let stepper = Stepper::new(space.clone(), TimeGrid::new(1.0, 6, 0.3).unwrap()).unwrap();
        let mu = TemporalProfile::sample(stepper.grid(), |t| 1.0 + t);
        let f = space.interpolate(|x| (k as f64 * x[0]).sin());
        let g = space.interpolate(|x| x[0] * x[0]);
        let uf = stepper.solve_forward(&f, &mu).unwrap();
        let ug = stepper.solve_forward(&g, &mu).unwrap();
        let ufg = stepper.solve_forward(&f.lin_comb(a, &g, b), &mu).unwrap();
        for ((x, y), z) in uf.slices().iter().zip(ug.slices()).zip(ufg.slices()) {
            let want = x.lin_comb(a, y, b);
            for (p, q) in want.coeffs().iter().zip(z.coeffs()) {
                prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
            }
        }
    }

    #[test]
    fn noisy_runs_stay_finite(seed in 0u64..1000) {
        let mut cfg = registry::find("1d-b").unwrap().config;
        cfg.seed = seed;
        let run = run_experiment(&cfg).unwrap();
        prop_assert!(run.record.err.is_finite());
        prop_assert!(run.record.monotone);
        prop_assert!(run.f_rec.coeffs().iter().all(|x| x.is_finite()));
    }
}
