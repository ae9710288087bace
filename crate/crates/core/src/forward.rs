//! L1-in-time, P1-in-space marching for `∂_t^α u - Δu + u = f(x) μ(t)` with
//! homogeneous Neumann data and `u(·, 0) = 0`.

use std::sync::Arc;

use nalgebra_sparse::CsrMatrix;

use crate::error::{ensure_len, Error, Result};
use crate::fem::{FeField, FemSpace};
use crate::fracops::{l1_weights, L1Weights};
use crate::linalg::{axpy, matvec, matvec_into, SpdSolver};

/// Uniform partition of `[0, T]` with its L1 and trapezoidal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
    tau: f64,
    weights: L1Weights,
    trap: Vec<f64>,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize, alpha: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::invalid("T", format!("{t_final} must be positive")));
        }
        if steps == 0 {
            return Err(Error::invalid("M", "need at least one time step"));
        }
        let tau = t_final / steps as f64;
        let weights = l1_weights(alpha, tau, steps)?;
        let mut trap = vec![1.0; steps + 1];
        trap[0] = 0.5;
        trap[steps] = 0.5;
        Ok(TimeGrid {
            t_final,
            steps,
            tau,
            weights,
            trap,
        })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// `M`
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.weights.alpha()
    }

    pub fn weights(&self) -> &L1Weights {
        &self.weights
    }

    /// Trapezoidal coefficients `c_0 .. c_M` (without the factor `τ`).
    pub fn trap(&self) -> &[f64] {
        &self.trap
    }

    pub fn t(&self, m: usize) -> f64 {
        m as f64 * self.tau
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |m| self.t(m))
    }
}

/// Samples `μ(t_0) .. μ(t_M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalProfile(pub Vec<f64>);

impl TemporalProfile {
    pub fn sample(grid: &TimeGrid, mu: impl Fn(f64) -> f64) -> Self {
        TemporalProfile(grid.nodes().map(mu).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.0
    }

    pub fn check(&self, grid: &TimeGrid) -> Result<()> {
        ensure_len("temporal profile", grid.steps() + 1, self.0.len())
    }
}

/// One field per time node, `u^0 .. u^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory(pub Vec<FeField>);

impl Trajectory {
    pub fn zeros(slices: usize, dofs: usize) -> Self {
        Trajectory(vec![FeField::zeros(dofs); slices])
    }

    pub fn slices(&self) -> &[FeField] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Trajectory {
        Trajectory(self.0.iter().rev().cloned().collect())
    }
}

/// Space/time discretization with the step matrix `(1+b0)·M + b0·K` factored once.
///
/// The same factorization serves the forward problem and the time-mirrored
/// adjoint problem, and may be shared between threads.
#[derive(Debug)]
pub struct Stepper {
    space: Arc<FemSpace>,
    grid: TimeGrid,
    system: SpdSolver,
}

impl Stepper {
    pub fn new(space: Arc<FemSpace>, grid: TimeGrid) -> Result<Self> {
        let b0 = grid.weights().b0();
        let system: CsrMatrix<f64> = space.mass() * (1.0 + b0) + space.stiffness() * b0;
        let system = SpdSolver::factor(system)?;
        Ok(Stepper {
            space,
            grid,
            system,
        })
    }

    pub fn space(&self) -> &FemSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dofs(&self) -> usize {
        self.space.dof_count()
    }

    /// Runs the L1 recurrence from `u^0 = initial`:
    ///
    /// `[(1+b0)M + b0K] u^{m+1} = M[Σ_{j<m} (d_j - d_{j+1}) u^{m-j} + d_m u^0] + b0·load(m+1)`
    ///
    /// `load(k, out)` writes the load vector of step `k` (already tested
    /// against the basis) into `out`.
    pub fn march(
        &self,
        initial: &FeField,
        mut load: impl FnMut(usize, &mut [f64]),
    ) -> Result<Trajectory> {
        let n = self.dofs();
        self.space.check(initial)?;
        let steps = self.grid.steps();
        let d = self.grid.weights().d();
        let b0 = self.grid.weights().b0();

        let mut slices: Vec<FeField> = Vec::with_capacity(steps + 1);
        slices.push(initial.clone());
        let mut hist = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut src = vec![0.0; n];
        for m in 0..steps {
            hist.iter_mut().for_each(|v| *v = 0.0);
            axpy(d[m], slices[0].coeffs(), &mut hist);
            for j in 0..m {
                axpy(d[j] - d[j + 1], slices[m - j].coeffs(), &mut hist);
            }
            matvec_into(self.space.mass(), &hist, &mut rhs);
            src.iter_mut().for_each(|v| *v = 0.0);
            load(m + 1, &mut src);
            axpy(b0, &src, &mut rhs);
            if rhs.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: m + 1 });
            }
            let next = self.system.solve(&rhs)?;
            if next.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { step: m + 1 });
            }
            slices.push(FeField(next));
        }
        Ok(Trajectory(slices))
    }

    /// Forward solution `u^0 .. u^M` for the source `f(x) μ(t)`.
    pub fn solve_forward(&self, f: &FeField, mu: &TemporalProfile) -> Result<Trajectory> {
        self.space.check(f)?;
        mu.check(&self.grid)?;
        let mf = matvec(self.space.mass(), f.coeffs());
        let mu = mu.samples();
        self.march(&FeField::zeros(self.dofs()), |k, out| {
            out.iter_mut().zip(&mf).for_each(|(o, v)| *o = mu[k] * v);
        })
    }

    /// Residual of the variational form
    /// `(∂̄u^m, χ) + (∇u^m, ∇χ) + (u^m, χ) - (f μ^m, χ)` for every basis `χ`, per slice `m ≥ 1`.
    pub fn variational_residual(
        &self,
        traj: &Trajectory,
        f: &FeField,
        mu: &TemporalProfile,
    ) -> Result<Vec<Vec<f64>>> {
        let n = self.dofs();
        let w = self.grid.weights();
        let mf = matvec(self.space.mass(), f.coeffs());
        let mut out = Vec::with_capacity(self.grid.steps());
        for m in 1..traj.len() {
            // pointwise discrete Caputo derivative at t_m
            let caputo: Vec<f64> = (0..n)
                .map(|i| {
                    let h: Vec<f64> = traj.0[..=m].iter().map(|s| s.0[i]).collect();
                    crate::fracops::caputo_l1(&h, w)
                })
                .collect::<Result<_>>()?;
            let u = traj.0[m].coeffs();
            let a = matvec(self.space.mass(), &caputo);
            let b = matvec(self.space.stiffness(), u);
            let c = matvec(self.space.mass(), u);
            out.push(
                (0..n)
                    .map(|i| a[i] + b[i] + c[i] - mu.0[m] * mf[i])
                    .collect(),
            );
        }
        Ok(out)
    }
}
