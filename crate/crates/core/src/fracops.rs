//! Scalar kernels for Caputo-type fractional calculus on uniform time grids.
//!
//! The L1 scheme replaces the derivative inside the Caputo integral by the
//! slope of the piecewise-linear interpolant on each cell, which gives the
//! convolution weights `d_j = (j+1)^(1-α) - j^(1-α)` and the scale factor
//! `b0 = Γ(2-α) τ^α`.

use crate::error::{Error, Result};

/// L1 convolution weights for a fixed order and step.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    alpha: f64,
    tau: f64,
    d: Vec<f64>,
    b0: f64,
}

/// Builds `d_0 .. d_{steps-1}` and `b0` for order `alpha` and step `tau`.
pub fn l1_weights(alpha: f64, tau: f64, steps: usize) -> Result<L1Weights> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} is outside (0, 1)")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau", format!("{tau} must be positive")));
    }
    if steps == 0 {
        return Err(Error::invalid("steps", "need at least one time step"));
    }
    let p = 1.0 - alpha;
    let d = (0..steps)
        .map(|j| {
            let j = j as f64;
            (j + 1.0).powf(p) - j.powf(p)
        })
        .collect();
    let b0 = libm::tgamma(2.0 - alpha) * tau.powf(alpha);
    Ok(L1Weights { alpha, tau, d, b0 })
}

impl L1Weights {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    /// `d_0 .. d_{M-1}`.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Number of steps the weights cover.
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// The equivalent single-sum weights `γ_0 .. γ_{m+1}` acting on
    /// `u^{m+1}, u^m, .., u^0`.
    pub fn gamma(&self, m: usize) -> Result<Vec<f64>> {
        if m >= self.d.len() {
            return Err(Error::LengthMismatch {
                what: "L1 weights",
                expected: m + 1,
                got: self.d.len(),
            });
        }
        let d = &self.d;
        let mut g = Vec::with_capacity(m + 2);
        g.push(d[0]);
        g.extend((1..=m).map(|j| d[j] - d[j - 1]));
        g.push(-d[m]);
        Ok(g)
    }
}

fn check_history(history: &[f64], weights: &L1Weights) -> Result<usize> {
    if history.len() < 2 {
        return Err(Error::LengthMismatch {
            what: "Caputo history",
            expected: 2,
            got: history.len(),
        });
    }
    let m = history.len() - 2;
    if m >= weights.len() {
        return Err(Error::LengthMismatch {
            what: "L1 weights",
            expected: m + 1,
            got: weights.len(),
        });
    }
    Ok(m)
}

/// Discrete Caputo derivative at the last entry of `history = (u^0, .., u^{m+1})`.
pub fn caputo_l1(history: &[f64], weights: &L1Weights) -> Result<f64> {
    let m = check_history(history, weights)?;
    let last = m + 1;
    let sum: f64 = weights.d[..=m]
        .iter()
        .enumerate()
        .map(|(j, dj)| dj * (history[last - j] - history[last - j - 1]))
        .sum();
    Ok(sum / weights.b0)
}

/// Same quantity as [`caputo_l1`] evaluated through the `γ_j` weights.
pub fn caputo_l1_gamma(history: &[f64], weights: &L1Weights) -> Result<f64> {
    let m = check_history(history, weights)?;
    let gamma = weights.gamma(m)?;
    let last = m + 1;
    let sum: f64 = gamma
        .iter()
        .enumerate()
        .map(|(j, g)| g * history[last - j])
        .sum();
    Ok(sum / weights.b0)
}

/// Parameters of the two-parameter Mittag-Leffler series `E_{α,β}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    pub alpha: f64,
    pub beta: f64,
    /// Summation stops once a term (past the peak of the series) is smaller
    /// than this in magnitude.
    pub series_tol: f64,
    pub max_terms: usize,
}

impl MLParams {
    /// `E_α = E_{α,1}`.
    pub fn one(alpha: f64) -> Self {
        Self::two(alpha, 1.0)
    }

    pub fn two(alpha: f64, beta: f64) -> Self {
        MLParams {
            alpha,
            beta,
            series_tol: 1e-17,
            max_terms: 20_000,
        }
    }
}

/// Real-argument Mittag-Leffler function by direct power series.
///
/// Intended for moderate `|z|`: strongly negative arguments lose accuracy to
/// cancellation, and very large ones exhaust `max_terms`, which is reported
/// as an error rather than returning a truncated value.
pub fn mittag_leffler(params: &MLParams, z: f64) -> Result<f64> {
    let MLParams {
        alpha,
        beta,
        series_tol,
        max_terms,
    } = *params;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", format!("{alpha} must be positive")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid("beta", format!("{beta} must be positive")));
    }
    if !(series_tol > 0.0) || max_terms == 0 {
        return Err(Error::invalid(
            "series_tol",
            "tolerance must be positive and max_terms at least 1",
        ));
    }
    if !z.is_finite() {
        return Err(Error::invalid("z", "argument must be finite"));
    }

    let ln_abs_z = z.abs().ln();
    let negative = z < 0.0;
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    // z^k kept as a running product while it stays representable
    let mut z_pow = 1.0f64;
    for k in 0..max_terms {
        let arg = alpha * k as f64 + beta;
        let term = if k == 0 {
            1.0 / libm::tgamma(beta)
        } else if z == 0.0 {
            0.0
        } else if arg < 170.0 && z_pow.is_finite() && z_pow != 0.0 {
            z_pow / libm::tgamma(arg)
        } else {
            let mag = (k as f64 * ln_abs_z - libm::lgamma(arg)).exp();
            if negative && k % 2 == 1 {
                -mag
            } else {
                mag
            }
        };
        if !term.is_finite() {
            break;
        }
        sum += term;
        let mag = term.abs();
        if k > 0 && mag < series_tol && mag <= prev {
            return Ok(sum);
        }
        prev = mag;
        z_pow *= z;
    }
    Err(Error::SeriesNotConverged { z, max_terms })
}

/// Which Riemann-Liouville integral to approximate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlDirection {
    /// `J_{0+}^α g(t) = Γ(α)^{-1} ∫_0^t (t-s)^{α-1} g(s) ds`
    Forward,
    /// `J_{T-}^α g(t) = Γ(α)^{-1} ∫_t^T (s-t)^{α-1} g(s) ds`
    Backward,
}

/// Product-trapezoidal quadrature of a Riemann-Liouville integral.
///
/// The kernel is integrated exactly against the piecewise-linear interpolant
/// of the samples, so the result is exact whenever `g` is piecewise linear on
/// the grid. Only used to cross-check the other kernels.
pub fn rl_integral_quadrature(
    g: &[f64],
    tau: f64,
    alpha: f64,
    direction: RlDirection,
) -> Result<Vec<f64>> {
    if g.len() < 2 {
        return Err(Error::LengthMismatch {
            what: "RL samples",
            expected: 2,
            got: g.len(),
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} is outside (0, 1)")));
    }
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", "must be positive"));
    }
    match direction {
        RlDirection::Forward => Ok(rl_forward(g, tau, alpha)),
        RlDirection::Backward => {
            let rev: Vec<f64> = g.iter().rev().copied().collect();
            let mut out = rl_forward(&rev, tau, alpha);
            out.reverse();
            Ok(out)
        }
    }
}

fn rl_forward(g: &[f64], tau: f64, alpha: f64) -> Vec<f64> {
    let a1 = alpha + 1.0;
    let scale = tau.powf(alpha) / libm::tgamma(alpha + 2.0);
    let pw = |k: usize| (k as f64).powf(a1);
    let mut out = vec![0.0; g.len()];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        let nf = n as f64;
        let mut acc = (pw(n - 1) - (nf - alpha - 1.0) * nf.powf(alpha)) * g[0];
        for (j, gj) in g.iter().enumerate().take(n).skip(1) {
            let k = n - j;
            acc += (pw(k + 1) - 2.0 * pw(k) + pw(k - 1)) * gj;
        }
        acc += g[n];
        *slot = scale * acc;
    }
    out
}
