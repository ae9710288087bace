//! Backward (adjoint) problem `(∂_{T-}^α - Δ + 1) v = 1_ω (u - u^δ)`, `v(T) = 0`.
//!
//! On a uniform grid the backward Caputo derivative becomes the forward one
//! under `t ↦ T - t`, so the adjoint is marched with the forward L1 stepper on
//! the mirrored data and flipped back. This discretizes the continuous
//! adjoint; it is consistent with, but not the exact transpose of, the
//! discrete forward map.

use crate::error::{ensure_len, Result};
use crate::fem::{FeField, SubdomainMask};
use crate::forward::{Stepper, TemporalProfile, Trajectory};
use crate::inverse::Observation;
use crate::linalg::{dot, matvec};

/// Load vectors `r^m = M_ω (u^m - u^{δ,m})`, one per time node.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual(pub Vec<Vec<f64>>);

impl Residual {
    pub fn from_misfit(mask: &SubdomainMask, u: &Trajectory, data: &[Vec<f64>]) -> Result<Self> {
        ensure_len("observation slices", u.len(), data.len())?;
        u.slices()
            .iter()
            .zip(data)
            .map(|(um, dm)| {
                ensure_len("observation slice", um.len(), dm.len())?;
                let diff: Vec<f64> = um.coeffs().iter().zip(dm).map(|(a, b)| a - b).collect();
                Ok(matvec(mask.matrix(), &diff))
            })
            .collect::<Result<_>>()
            .map(Residual)
    }

    pub fn zeros(slices: usize, dofs: usize) -> Self {
        Residual(vec![vec![0.0; dofs]; slices])
    }
}

impl Stepper {
    /// Adjoint trajectory `v^0 .. v^M` with `v^M = 0`.
    pub fn solve_adjoint(&self, res: &Residual) -> Result<Trajectory> {
        let steps = self.grid().steps();
        ensure_len("residual slices", steps + 1, res.0.len())?;
        for r in &res.0 {
            ensure_len("residual slice", self.dofs(), r.len())?;
        }
        // w^k = v^{M-k}; step k of the mirrored march is driven by r^{M-k}
        let mirrored = self.march(&FeField::zeros(self.dofs()), |k, out| {
            out.copy_from_slice(&res.0[steps - k]);
        })?;
        Ok(mirrored.reversed())
    }
}

/// `τ Σ_m c_m μ^m v^m` as a nodal field.
pub fn weighted_time_sum(stepper: &Stepper, mu: &TemporalProfile, v: &Trajectory) -> FeField {
    let grid = stepper.grid();
    let mut acc = vec![0.0; stepper.dofs()];
    for ((vm, c), m) in v.slices().iter().zip(grid.trap()).zip(mu.samples()) {
        crate::linalg::axpy(grid.tau() * c * m, vm.coeffs(), &mut acc);
    }
    FeField(acc)
}

/// Both sides of the discrete duality
/// `τ Σ c_m (u^m(f) - u^δ, u^m(p))_ω = τ Σ c_m μ^m (v^m(f), p)`.
pub fn adjoint_identity_check(
    stepper: &Stepper,
    mu: &TemporalProfile,
    f: &FeField,
    p: &FeField,
    obs: &Observation,
) -> Result<(f64, f64)> {
    let grid = stepper.grid();
    let uf = stepper.solve_forward(f, mu)?;
    let up = stepper.solve_forward(p, mu)?;
    let res = Residual::from_misfit(obs.mask(), &uf, obs.slices())?;

    let lhs: f64 = res
        .0
        .iter()
        .zip(up.slices())
        .zip(grid.trap())
        .map(|((r, u), c)| grid.tau() * c * dot(r, u.coeffs()))
        .sum();

    let v = stepper.solve_adjoint(&res)?;
    let g = weighted_time_sum(stepper, mu, &v);
    let rhs = stepper.space().inner(&g, p);
    Ok((lhs, rhs))
}
