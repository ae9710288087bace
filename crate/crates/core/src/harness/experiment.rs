use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fem::{assemble, omega_mass, FeField, FemSpace, SubdomainMask};
use crate::forward::{Stepper, TemporalProfile, TimeGrid, Trajectory};
use crate::inverse::{InverseConfig, InverseProblem, Observation};
use crate::mesh::build_mesh;

use super::config::{ExperimentConfig, LChoice, AUTO_L_MARGIN};
use super::noise::gen_noise;

/// Summary of one reconstruction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub config_hash: String,
    pub dim: usize,
    pub alpha: f64,
    pub delta: f64,
    pub omega: String,
    pub beta: f64,
    /// `L` actually used by the iteration.
    #[serde(rename = "L")]
    pub l: f64,
    /// Power-iteration estimate of `‖A_h‖²`.
    pub norm_estimate: f64,
    #[serde(rename = "L_nominal")]
    pub l_nominal: Option<f64>,
    /// Whether `L_nominal ≥ norm_estimate`.
    pub nominal_sufficient: Option<bool>,
    pub eps: f64,
    pub err: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub converged: bool,
    /// `J(f^{k+1}) ≤ J(f^k) + 1e-12·J(f^0)` at every step.
    pub monotone: bool,
    pub seconds: f64,
    pub seed: u64,
    pub objective_trace: Vec<f64>,
    pub rel_change_trace: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: RunRecord,
    pub space: Arc<FemSpace>,
    pub f_true: FeField,
    pub f_rec: FeField,
}

/// Discretization, ground truth and observation region of one configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub config: ExperimentConfig,
    pub space: Arc<FemSpace>,
    pub problem: InverseProblem,
    pub mask: Arc<SubdomainMask>,
    pub f_true: FeField,
}

pub fn setup(cfg: &ExperimentConfig) -> Result<Setup> {
    cfg.validate()?;
    let space = Arc::new(assemble(build_mesh(cfg.dim, cfg.n)?)?);
    let grid = TimeGrid::new(cfg.t_final, cfg.m, cfg.alpha)?;
    let stepper = Arc::new(Stepper::new(space.clone(), grid)?);
    let mu = TemporalProfile::sample(stepper.grid(), |t| cfg.mu.eval(t));
    let problem = InverseProblem::new(stepper, mu)?;
    let mask = Arc::new(omega_mass(&space, &cfg.omega)?);
    let f_true = space.l2_project(|x| cfg.f_true.eval(x))?;
    Ok(Setup {
        config: cfg.clone(),
        space,
        problem,
        mask,
        f_true,
    })
}

impl Setup {
    /// Noiseless data on the inversion grid, or projected from the refined grid
    /// when `data_refine` is set.
    pub fn clean_data(&self) -> Result<Trajectory> {
        let cfg = &self.config;
        let r = match cfg.data_refine {
            None | Some(1) => return self.problem.forward(&self.f_true),
            Some(r) => r,
        };
        let fine = Arc::new(assemble(build_mesh(cfg.dim, cfg.n * r)?)?);
        let grid = TimeGrid::new(cfg.t_final, cfg.m * r, cfg.alpha)?;
        let stepper = Stepper::new(fine.clone(), grid)?;
        let mu = TemporalProfile::sample(stepper.grid(), |t| cfg.mu.eval(t));
        let f_fine = fine.l2_project(|x| cfg.f_true.eval(x))?;
        let u = stepper.solve_forward(&f_fine, &mu)?;
        let slices = (0..=cfg.m)
            .map(|m| self.space.l2_project(|x| fine.evaluate(&u.0[m * r], x)))
            .collect::<Result<_>>()?;
        Ok(Trajectory(slices))
    }

    pub fn observe(&self) -> Result<Observation> {
        let clean = self.clean_data()?;
        gen_noise(&clean, self.mask.clone(), self.config.delta, self.config.seed)
    }

    pub fn norm_estimate(&self) -> Result<f64> {
        self.problem
            .estimate_l(&self.mask, self.config.power_iters, self.config.seed)
    }
}

/// `J(f^{k+1}) ≤ J(f^k) + 1e-12·J(f^0)` for every consecutive pair.
pub fn is_monotone(trace: &[f64]) -> bool {
    let slack = trace.first().map_or(0.0, |j0| 1e-12 * j0.abs());
    trace.windows(2).all(|w| w[1] <= w[0] + slack)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let s = setup(cfg)?;
    let obs = s.observe()?;
    let estimate = s.norm_estimate()?;
    let l = match cfg.l {
        LChoice::Fixed(l) => l,
        LChoice::Keyword(_) => AUTO_L_MARGIN * estimate,
    };
    let inv = InverseConfig {
        beta: cfg.beta,
        l,
        eps: cfg.eps,
        max_iters: cfg.max_iters,
        f0: FeField::constant(s.space.dof_count(), cfg.f0),
    };
    let res = s.problem.reconstruct(&obs, &inv, Some(&s.f_true))?;
    let record = RunRecord {
        id: cfg.id.clone(),
        config_hash: cfg.hash(),
        dim: cfg.dim,
        alpha: cfg.alpha,
        delta: cfg.delta,
        omega: cfg.omega.label(),
        beta: cfg.beta,
        l,
        norm_estimate: estimate,
        l_nominal: cfg.l_nominal,
        nominal_sufficient: cfg.l_nominal.map(|n| n >= estimate),
        eps: cfg.eps,
        err: res.err.unwrap_or(f64::NAN),
        k: res.iterations,
        converged: res.converged,
        monotone: is_monotone(&res.objective_trace),
        seconds: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
        objective_trace: res.objective_trace,
        rel_change_trace: res.rel_change_trace,
    };
    Ok(RunOutput {
        record,
        space: s.space,
        f_true: s.f_true,
        f_rec: res.f_rec,
    })
}

/// Runs every configuration on the current rayon pool; results keep input order.
pub fn run_sweep(configs: &[ExperimentConfig]) -> Vec<Result<RunOutput>> {
    configs.par_iter().map(run_experiment).collect()
}
