use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fem::BoxComplement;
use crate::inverse::InverseConfig;

/// Temporal factor `μ(t) = Σ_k coeffs[k]·t^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuSpec {
    Polynomial { coeffs: Vec<f64> },
}

impl MuSpec {
    pub fn affine(a0: f64, a1: f64) -> Self {
        MuSpec::Polynomial {
            coeffs: vec![a0, a1],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            MuSpec::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
        }
    }
}

/// Ground-truth spatial factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SourceSpec {
    /// `a·sin(πx) + b·sin(πx/2) + c·x + d·x² + e`
    Trig1d {
        #[serde(default)]
        sin_pi: f64,
        #[serde(default)]
        sin_half_pi: f64,
        #[serde(default)]
        x: f64,
        #[serde(default)]
        x2: f64,
        #[serde(default)]
        constant: f64,
    },
    /// `sin x₁ + sin x₂ + constant`
    SinSum2d { constant: f64 },
    /// `cos(πx₁)·cos(πx₂) + constant`
    CosProduct2d { constant: f64 },
    /// `exp(rate·(x₁ + x₂)) + constant`
    ExpSum2d { rate: f64, constant: f64 },
    Constant { value: f64 },
}

impl SourceSpec {
    pub fn dim(&self) -> Option<usize> {
        match self {
            SourceSpec::Trig1d { .. } => Some(1),
            SourceSpec::SinSum2d { .. }
            | SourceSpec::CosProduct2d { .. }
            | SourceSpec::ExpSum2d { .. } => Some(2),
            SourceSpec::Constant { .. } => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            SourceSpec::Trig1d {
                sin_pi,
                sin_half_pi,
                x: a,
                x2,
                constant,
            } => {
                let s = x[0];
                sin_pi * (PI * s).sin() + sin_half_pi * (0.5 * PI * s).sin() + a * s + x2 * s * s + constant
            }
            SourceSpec::SinSum2d { constant } => x[0].sin() + x[1].sin() + constant,
            SourceSpec::CosProduct2d { constant } => (PI * x[0]).cos() * (PI * x[1]).cos() + constant,
            SourceSpec::ExpSum2d { rate, constant } => (rate * (x[0] + x[1])).exp() + constant,
            SourceSpec::Constant { value } => value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LKeyword {
    Auto,
}

/// The tuning constant `L`: a fixed value, or `"auto"` for
/// `AUTO_L_MARGIN × (power-iteration estimate of ‖A_h‖²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LChoice {
    Fixed(f64),
    Keyword(LKeyword),
}

pub const AUTO_L_MARGIN: f64 = 1.1;

fn default_t() -> f64 {
    1.0
}

fn default_max_iters() -> usize {
    InverseConfig::DEFAULT_MAX_ITERS
}

fn default_power_iters() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "T", default = "default_t")]
    pub t_final: f64,
    pub alpha: f64,
    pub mu: MuSpec,
    pub f_true: SourceSpec,
    #[serde(default)]
    pub omega: BoxComplement,
    pub delta: f64,
    pub seed: u64,
    pub beta: f64,
    #[serde(rename = "L")]
    pub l: LChoice,
    /// Conventional `L` for this experiment family, checked against the estimate.
    #[serde(rename = "L_nominal", default, skip_serializing_if = "Option::is_none")]
    pub l_nominal: Option<f64>,
    pub eps: f64,
    pub f0: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_power_iters")]
    pub power_iters: usize,
    /// Generate data on a grid refined by this factor in space and time, then project.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_refine: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::invalid("id", "must not be empty"));
        }
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::invalid("dim", format!("{} is not 1 or 2", self.dim)));
        }
        if self.n < 2 {
            return Err(Error::invalid("n", format!("{} is below 2", self.n)));
        }
        if self.m == 0 {
            return Err(Error::invalid("M", "must be at least 1"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::invalid("T", format!("{} must be positive", self.t_final)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{} is outside (0, 1)", self.alpha)));
        }
        if let Some(d) = self.f_true.dim() {
            if d != self.dim {
                return Err(Error::invalid(
                    "f_true",
                    format!("expression is {d}-dimensional, experiment is {}-dimensional", self.dim),
                ));
            }
        }
        let MuSpec::Polynomial { coeffs } = &self.mu;
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("mu", "needs finite coefficients"));
        }
        self.omega.validate(self.dim, self.n)?;
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta", format!("{} must be >= 0", self.delta)));
        }
        if let LChoice::Fixed(l) = self.l {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::invalid("L", format!("{l} must be > 0")));
            }
        }
        if self.power_iters == 0 {
            return Err(Error::invalid("power_iters", "must be at least 1"));
        }
        if self.data_refine == Some(0) {
            return Err(Error::invalid("data_refine", "must be at least 1"));
        }
        // remaining inverse parameters are checked with a placeholder start vector
        InverseConfig {
            beta: self.beta,
            l: 1.0,
            eps: self.eps,
            max_iters: self.max_iters,
            f0: crate::fem::FeField::zeros(0),
        }
        .validate()
    }

    /// Leading 64 bits of the SHA-256 of the canonical JSON form, in hex.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses one object or an array of objects.
pub fn parse_configs(text: &str) -> Result<Vec<ExperimentConfig>> {
    parse_at(text, Path::new("<input>"))
}

pub fn load_configs(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_at(&text, path)
}

fn parse_at(text: &str, path: &Path) -> Result<Vec<ExperimentConfig>> {
    let json_err = |source| Error::Json {
        path: PathBuf::from(path),
        source,
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
    let configs: Vec<ExperimentConfig> = match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .map(serde_json::from_value)
            .collect::<std::result::Result<_, _>>()
            .map_err(json_err)?,
        other => vec![serde_json::from_value(other).map_err(json_err)?],
    };
    for c in &configs {
        c.validate()?;
    }
    Ok(configs)
}

pub fn to_json(configs: &[ExperimentConfig]) -> String {
    let text = if configs.len() == 1 {
        serde_json::to_string_pretty(&configs[0])
    } else {
        serde_json::to_string_pretty(configs)
    };
    text.expect("config serializes")
}
