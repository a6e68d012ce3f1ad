//! Distribution of the interference factor on `[-1, 1]`: a two-branch beta
//! family, the mean positive and negative parts `q₊`, `q₋`, and the
//! balance condition `q₊ + q₋ = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{beta_kernel_integral, ln_beta};

/// Smallest `|q|` at which the density is evaluated; the density itself
/// diverges at the endpoints when a shape is below one.
pub const PDF_ENDPOINT_CAP: f64 = 1e-15;

/// Tolerance for `λ₊ + λ₋ = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Beta density on `[0, 1]` with weight `λ₊` and shapes `(α, β)`, mirrored
/// onto `[-1, 0]` with weight `λ₋` and shapes `(μ, ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaPairDistribution {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub nu: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl BetaPairDistribution {
    pub fn new(alpha: f64, beta: f64, mu: f64, nu: f64, lambda_plus: f64, lambda_minus: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("mu", mu), ("nu", nu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("shape {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("lambda_plus", lambda_plus), ("lambda_minus", lambda_minus)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if (lambda_plus + lambda_minus - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "branch weights must sum to one, got {}",
                lambda_plus + lambda_minus
            )));
        }
        Ok(Self { alpha, beta, mu, nu, lambda_plus, lambda_minus })
    }

    /// `λ₊ = λ₋ = 1/2`, `α = β`, `μ = ν`.
    pub fn symmetric(alpha: f64, mu: f64) -> Result<Self> {
        Self::new(alpha, alpha, mu, mu, 0.5, 0.5)
    }

    /// The flat density `1/2`.
    pub fn uniform() -> Self {
        Self::symmetric(1.0, 1.0).expect("unit shapes are valid")
    }
}

/// Mean positive and negative parts of the interference factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QSplit {
    pub q_plus: f64,
    pub q_minus: f64,
}

impl QSplit {
    pub fn residual(&self) -> f64 {
        self.q_plus + self.q_minus
    }
}

/// Density at `q ∈ [-1, 1]`. At `q = 0` the right branch is used; where a
/// branch diverges the value at distance [`PDF_ENDPOINT_CAP`] is returned.
pub fn pdf(d: &BetaPairDistribution, q: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&q) {
        return Err(Error::OutOfDomain { q });
    }
    Ok(if q >= 0.0 { branch(d.lambda_plus, d.alpha, d.beta, q) } else { branch(d.lambda_minus, d.mu, d.nu, -q) })
}

fn branch(weight: f64, a: f64, b: f64, x: f64) -> f64 {
    if weight == 0.0 || (x == 0.0 && a > 1.0) || (x == 1.0 && b > 1.0) {
        return 0.0;
    }
    let x = x.clamp(PDF_ENDPOINT_CAP, 1.0 - PDF_ENDPOINT_CAP);
    weight * ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)).exp()
}

/// `q₊ = αλ₊/(α+β)`, `q₋ = -μλ₋/(μ+ν)`.
pub fn q_split_closed(d: &BetaPairDistribution) -> QSplit {
    QSplit { q_plus: d.alpha * d.lambda_plus / (d.alpha + d.beta), q_minus: -d.mu * d.lambda_minus / (d.mu + d.nu) }
}

/// `q₊ = ∫_0^1 qφ dq` and `q₋ = ∫_{-1}^0 qφ dq` by quadrature, each to
/// absolute accuracy `tol`.
pub fn q_split_numeric(d: &BetaPairDistribution, tol: f64) -> Result<QSplit> {
    // ∫_0^1 x · x^{a-1}(1-x)^{b-1} / B(a,b) dx
    let moment = |a: f64, b: f64| -> Result<f64> {
        let scale = (-ln_beta(a, b)).exp();
        Ok(beta_kernel_integral(a + 1.0, b, tol / scale.max(1.0))? * scale)
    };
    Ok(QSplit { q_plus: d.lambda_plus * moment(d.alpha, d.beta)?, q_minus: -d.lambda_minus * moment(d.mu, d.nu)? })
}

/// `∫_{-1}^1 φ dq` by quadrature.
pub fn pdf_integral(d: &BetaPairDistribution, tol: f64) -> Result<f64> {
    let mass = |a: f64, b: f64| -> Result<f64> {
        let scale = (-ln_beta(a, b)).exp();
        Ok(beta_kernel_integral(a, b, tol / scale.max(1.0))? * scale)
    };
    Ok(d.lambda_plus * mass(d.alpha, d.beta)? + d.lambda_minus * mass(d.mu, d.nu)?)
}

/// `q₊ + q₋` from the closed forms.
pub fn zero_mean_residual(d: &BetaPairDistribution) -> f64 {
    q_split_closed(d).residual()
}

/// Outcome of [`solve_balanced`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Balance {
    Feasible(BetaPairDistribution),
    Infeasible { residual: f64 },
}

/// Tolerance on `αλ₊/(α+β) - μλ₋/(μ+ν)` for a configuration to count as balanced.
pub const BALANCE_TOL: f64 = 1e-12;

/// Check whether `(α, β, λ₊, μ, ν)` with `λ₋ = 1 - λ₊` has zero mean.
pub fn solve_balanced(alpha: f64, beta: f64, lambda_plus: f64, mu: f64, nu: f64) -> Result<Balance> {
    if !(lambda_plus > 0.0 && lambda_plus < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda_plus must lie in (0, 1), got {lambda_plus}")));
    }
    let d = BetaPairDistribution::new(alpha, beta, mu, nu, lambda_plus, 1.0 - lambda_plus)?;
    let residual = zero_mean_residual(&d);
    if residual.abs() <= BALANCE_TOL {
        Ok(Balance::Feasible(d))
    } else {
        Ok(Balance::Infeasible { residual })
    }
}
