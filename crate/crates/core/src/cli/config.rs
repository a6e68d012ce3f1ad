//! JSON configuration accepted by `--config`, one object per command.
//!
//! Complex numbers are written either as a bare real number or as a
//! `[re, im]` pair. States are one of
//! `{"diagonal": [..]}`, `{"pure": [..]}` or `{"matrix": [[..], ..]}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::becsim::BecParams;
use crate::error::{Error, Result};
use crate::events::DensityOperator;
use crate::linalg::{ComplexMatrix, ComplexVector, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

pub fn complex_list(values: &[ComplexValue]) -> Vec<Complex64> {
    values.iter().map(|&v| v.into()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSpec {
    Diagonal(Vec<f64>),
    Pure(Vec<ComplexValue>),
    Matrix(Vec<Vec<ComplexValue>>),
}

impl StateSpec {
    pub fn build(&self) -> Result<DensityOperator> {
        match self {
            StateSpec::Diagonal(p) => DensityOperator::diagonal(p),
            StateSpec::Pure(v) => DensityOperator::pure(&ComplexVector::new(complex_list(v))?),
            StateSpec::Matrix(rows) => DensityOperator::new(matrix_from_rows(rows)?, DEFAULT_TOL),
        }
    }
}

pub fn matrix_from_rows(rows: &[Vec<ComplexValue>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(n * m);
    for row in rows {
        if row.len() != m {
            return Err(Error::DimensionMismatch { expected: m, found: row.len() });
        }
        data.extend(complex_list(row));
    }
    ComplexMatrix::new(n, m, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureConfig {
    pub state: StateSpec,
    /// Hermitian observable; the computational basis when absent.
    pub observable: Option<Vec<Vec<ComplexValue>>>,
    /// Weights of an uncertain union over the observable's eigenbasis.
    pub weights: Option<Vec<ComplexValue>>,
    /// Subsets of eigen-indices whose standard-union probability is reported.
    pub unions: Vec<Vec<usize>>,
    pub strict: bool,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            state: StateSpec::Pure(vec![ComplexValue::Real(h), ComplexValue::Real(h)]),
            observable: None,
            weights: Some(vec![ComplexValue::Real(h), ComplexValue::Real(h)]),
            unions: Vec::new(),
            strict: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// ρ_A ⊗ ρ_B from `rho_a` and `rho_b`.
    Product,
    /// `M^{-1/2} Σ_m |mm>`.
    MaxEntangled,
    /// `(|00> + |01> + |10> - |11>)/2`.
    BellLike,
    /// Full matrix from `state` with `dim_a`, `dim_b`.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProspectConfig {
    pub preset: Preset,
    pub modes: usize,
    pub rho_a: Option<StateSpec>,
    pub rho_b: Option<StateSpec>,
    pub state: Option<StateSpec>,
    pub dim_a: Option<usize>,
    pub dim_b: Option<usize>,
    /// B-weights; uniform when absent.
    pub weights: Option<Vec<ComplexValue>>,
    /// Reject non-normalized weights instead of rescaling them.
    pub strict: bool,
    pub normalized: bool,
}

impl Default for ProspectConfig {
    fn default() -> Self {
        Self {
            preset: Preset::BellLike,
            modes: 2,
            rho_a: None,
            rho_b: None,
            state: None,
            dim_a: None,
            dim_b: None,
            weights: None,
            strict: true,
            normalized: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarterRow {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub nu: f64,
    pub lambda_plus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuarterLawConfig {
    /// Symmetric rows `α = β = μ = ν`, `λ₊ = 1/2`.
    pub alphas: Vec<f64>,
    /// Explicit rows appended after the symmetric grid.
    pub rows: Vec<QuarterRow>,
}

impl Default for QuarterLawConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.3, 0.5, 1.0, 2.0, 5.0, 10.0],
            rows: vec![QuarterRow { alpha: 2.0, beta: 1.0, mu: 4.0, nu: 5.0, lambda_plus: 0.4 }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BecSimConfig {
    #[serde(flatten)]
    pub params: BecParams,
    pub stride: usize,
}

impl Default for BecSimConfig {
    fn default() -> Self {
        Self { params: BecParams::default(), stride: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Paths per ensemble for the antisymmetry and fluctuation checks.
    pub paths: usize,
    /// Paths per ensemble for the noise-strength sweep.
    pub sweep_paths: usize,
    pub dt: f64,
    pub t_max: f64,
    pub sigma: f64,
    pub stride: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 0, paths: 2000, sweep_paths: 4000, dt: 1e-3, t_max: 100.0, sigma: 0.1, stride: 100 }
    }
}

/// Parse a command's section from a config file; missing keys keep defaults.
pub fn load<T: for<'de> Deserialize<'de> + Default>(path: Option<&std::path::Path>) -> std::result::Result<T, String> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", p.display()))
        }
    }
}
