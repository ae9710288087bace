//! Tikhonov objective, adjoint gradient, operator-norm estimate and the
//! shrinkage iteration `f ← (L f - τ Σ c_m μ^m v^m) / (L + β)`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adjoint::{weighted_time_sum, Residual};
use crate::error::{ensure_len, Error, Result};
use crate::fem::{FeField, SubdomainMask};
use crate::forward::{Stepper, TemporalProfile, TimeGrid, Trajectory};
use crate::linalg::matvec;

/// Noisy data `u^{δ,0} .. u^{δ,M}` at every node; only ω-weighted products are taken.
#[derive(Debug, Clone)]
pub struct Observation {
    slices: Vec<Vec<f64>>,
    mask: Arc<SubdomainMask>,
    delta: f64,
}

impl Observation {
    pub fn new(slices: Vec<Vec<f64>>, mask: Arc<SubdomainMask>, delta: f64) -> Self {
        Observation {
            slices,
            mask,
            delta,
        }
    }

    pub fn from_trajectory(u: &Trajectory, mask: Arc<SubdomainMask>, delta: f64) -> Self {
        Self::new(u.slices().iter().map(|s| s.0.clone()).collect(), mask, delta)
    }

    pub fn slices(&self) -> &[Vec<f64>] {
        &self.slices
    }

    pub fn mask(&self) -> &SubdomainMask {
        &self.mask
    }

    pub fn mask_arc(&self) -> &Arc<SubdomainMask> {
        &self.mask
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn check(&self, grid: &TimeGrid, dofs: usize) -> Result<()> {
        ensure_len("observation slices", grid.steps() + 1, self.slices.len())?;
        for s in &self.slices {
            ensure_len("observation slice", dofs, s.len())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseConfig {
    pub beta: f64,
    pub l: f64,
    pub eps: f64,
    pub max_iters: usize,
    pub f0: FeField,
}

impl InverseConfig {
    pub const DEFAULT_MAX_ITERS: usize = 500;

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("beta", format!("{} must be >= 0", self.beta)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::invalid("L", format!("{} must be > 0", self.l)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::invalid("eps", format!("{} must be > 0", self.eps)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub f_rec: FeField,
    /// Number of updates `K`.
    pub iterations: usize,
    /// `J(f^0) .. J(f^K)`
    pub objective_trace: Vec<f64>,
    /// `‖f^{k+1} - f^k‖ / ‖f^k‖` for each update.
    pub rel_change_trace: Vec<f64>,
    pub err: Option<f64>,
    /// False when `max_iters` ran out before the stopping test passed.
    pub converged: bool,
}

/// `L/(L+β)·f_k - τ/(L+β)·Σ_m c_m μ^m v^m`, nodewise.
pub fn ista_step(
    f_k: &FeField,
    v: &Trajectory,
    beta: f64,
    l: f64,
    grid: &TimeGrid,
    mu: &TemporalProfile,
) -> Result<FeField> {
    ensure_len("adjoint slices", grid.steps() + 1, v.len())?;
    mu.check(grid)?;
    let shrink = l / (l + beta);
    let gain = grid.tau() / (l + beta);
    let mut out: Vec<f64> = f_k.coeffs().iter().map(|x| shrink * x).collect();
    for ((vm, c), m) in v.slices().iter().zip(grid.trap()).zip(mu.samples()) {
        ensure_len("adjoint slice", out.len(), vm.len())?;
        for (o, x) in out.iter_mut().zip(vm.coeffs()) {
            *o -= gain * c * m * x;
        }
    }
    Ok(FeField(out))
}

/// Relative L² distance `‖a - b‖ / ‖b‖` in the mass norm.
pub fn relative_error(stepper: &Stepper, a: &FeField, b: &FeField) -> f64 {
    let space = stepper.space();
    space.l2_norm(&a.lin_comb(1.0, b, -1.0)) / space.l2_norm(b)
}

/// A forward model with a fixed temporal profile, ready for inversion.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    stepper: Arc<Stepper>,
    mu: TemporalProfile,
}

impl InverseProblem {
    pub fn new(stepper: Arc<Stepper>, mu: TemporalProfile) -> Result<Self> {
        mu.check(stepper.grid())?;
        Ok(InverseProblem { stepper, mu })
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn mu(&self) -> &TemporalProfile {
        &self.mu
    }

    pub fn forward(&self, f: &FeField) -> Result<Trajectory> {
        self.stepper.solve_forward(f, &self.mu)
    }

    /// `τ Σ c_m ‖u^m - u^{δ,m}‖²_{L²(ω)}`
    pub fn misfit(&self, u: &Trajectory, obs: &Observation) -> Result<f64> {
        let grid = self.stepper.grid();
        let res = Residual::from_misfit(obs.mask(), u, obs.slices())?;
        Ok(res
            .0
            .iter()
            .zip(u.slices())
            .zip(obs.slices())
            .zip(grid.trap())
            .map(|(((r, um), dm), c)| {
                let e: f64 = r
                    .iter()
                    .zip(um.coeffs().iter().zip(dm))
                    .map(|(ri, (a, b))| ri * (a - b))
                    .sum();
                grid.tau() * c * e
            })
            .sum())
    }

    pub fn objective(&self, f: &FeField, obs: &Observation, beta: f64) -> Result<f64> {
        self.check_obs(obs)?;
        let u = self.forward(f)?;
        let reg = self.stepper.space().inner(f, f);
        Ok(self.misfit(&u, obs)? + beta * reg)
    }

    /// Adjoint trajectory for the misfit of `f`.
    pub fn adjoint_of(&self, f: &FeField, obs: &Observation) -> Result<(Trajectory, Trajectory)> {
        let u = self.forward(f)?;
        let res = Residual::from_misfit(obs.mask(), &u, obs.slices())?;
        let v = self.stepper.solve_adjoint(&res)?;
        Ok((u, v))
    }

    /// `2(τ Σ c_m μ^m v^m(f) + β f)` as nodal coefficients.
    pub fn gradient(&self, f: &FeField, obs: &Observation, beta: f64) -> Result<FeField> {
        self.check_obs(obs)?;
        let (_, v) = self.adjoint_of(f, obs)?;
        let s = weighted_time_sum(&self.stepper, &self.mu, &v);
        Ok(s.lin_comb(2.0, f, 2.0 * beta))
    }

    /// `f ↦ τ Σ c_m μ^m v^m(f)` with zero data.
    pub fn normal_apply(&self, mask: &SubdomainMask, f: &FeField) -> Result<FeField> {
        let u = self.forward(f)?;
        let res = Residual(u.slices().iter().map(|s| matvec(mask.matrix(), s.coeffs())).collect());
        let v = self.stepper.solve_adjoint(&res)?;
        Ok(weighted_time_sum(&self.stepper, &self.mu, &v))
    }

    /// Power iteration for the largest eigenvalue of the normal operator,
    /// i.e. an estimate of `‖A_h‖²`. Returns the largest mass-weighted
    /// Rayleigh quotient seen, so more iterations never lower the value.
    pub fn estimate_l(&self, mask: &SubdomainMask, iters: usize, seed: u64) -> Result<f64> {
        if iters == 0 {
            return Err(Error::invalid("iters", "must be at least 1"));
        }
        if self.mu.samples().iter().all(|m| *m == 0.0) {
            return Ok(0.0);
        }
        let space = self.stepper.space();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = FeField(
            (0..self.stepper.dofs())
                .map(|_| rng.random_range(0.5..1.5))
                .collect(),
        );
        x = x.scaled(1.0 / space.l2_norm(&x));
        let mut best = 0.0_f64;
        for k in 0..iters {
            let y = self.normal_apply(mask, &x)?;
            best = best.max(space.inner(&y, &x));
            let ny = space.l2_norm(&y);
            if !(ny > 0.0) || !ny.is_finite() {
                return Err(Error::Breakdown { iter: k });
            }
            x = y.scaled(1.0 / ny);
        }
        Ok(best)
    }

    /// Runs the shrinkage iteration from `config.f0` until
    /// `‖f^{k+1} - f^k‖ / ‖f^k‖ < eps` or `max_iters` updates.
    pub fn reconstruct(
        &self,
        obs: &Observation,
        config: &InverseConfig,
        f_true: Option<&FeField>,
    ) -> Result<ReconstructionResult> {
        config.validate()?;
        self.check_obs(obs)?;
        let space = self.stepper.space();
        space.check(&config.f0)?;
        if let Some(t) = f_true {
            space.check(t)?;
        }
        let grid = self.stepper.grid();

        let mut f = config.f0.clone();
        let mut objective_trace = Vec::new();
        let mut rel_change_trace = Vec::new();
        let mut converged = false;
        let mut k = 0;
        loop {
            let (u, v) = self.adjoint_of(&f, obs)?;
            objective_trace.push(self.misfit(&u, obs)? + config.beta * space.inner(&f, &f));
            if converged || k == config.max_iters {
                break;
            }
            let next = ista_step(&f, &v, config.beta, config.l, grid, &self.mu)?;
            let denom = space.l2_norm(&f);
            if !(denom > 0.0) {
                return Err(Error::DegenerateIterate { iter: k });
            }
            let rel = space.l2_norm(&next.lin_comb(1.0, &f, -1.0)) / denom;
            if !rel.is_finite() {
                return Err(Error::NonFinite { step: k + 1 });
            }
            rel_change_trace.push(rel);
            f = next;
            k += 1;
            converged = rel < config.eps;
        }
        let err = f_true.map(|t| relative_error(&self.stepper, &f, t));
        Ok(ReconstructionResult {
            f_rec: f,
            iterations: k,
            objective_trace,
            rel_change_trace,
            err,
            converged,
        })
    }

    fn check_obs(&self, obs: &Observation) -> Result<()> {
        obs.check(self.stepper.grid(), self.stepper.dofs())
    }
}
