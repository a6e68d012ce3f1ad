//! Projective measurements: projectors, event probabilities, and additive
//! unions of mutually orthogonal events.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::{check_dims, hermitian_eigen, outer, ComplexMatrix, ComplexVector, SpectralDecomposition};

/// Largest rounding excursion outside `[0, 1]` that is silently clamped.
pub const CLAMP_SLACK: f64 = 1e-9;

/// A trace-one positive Hermitian operator (the system state).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace, and positivity within `tol`.
    /// Nothing is repaired: an invalid matrix is an error.
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let deviation = matrix.hermitian_deviation()?;
        if deviation >= tol {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = matrix.trace()?;
        if (tr.re - 1.0).abs() >= tol || tr.im.abs() >= tol {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let spectrum = hermitian_eigen(&matrix, tol)?;
        let min = spectrum.eigenvalues()[0];
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    /// `|psi><psi|` for a unit vector.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm_sq = psi.norm_sqr();
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { matrix: outer(psi, psi) })
    }

    /// Diagonal state in the computational basis.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        if probs.iter().any(|&p| p < 0.0) {
            return Err(Error::InvalidState("negative population".into()));
        }
        Self::new(ComplexMatrix::from_real_diag(probs), crate::linalg::DEFAULT_TOL)
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().map(|t| t.re).unwrap_or(f64::NAN)
    }
}

/// A Hermitian observable given by its spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    spectral: SpectralDecomposition,
}

impl Observable {
    pub fn new(spectral: SpectralDecomposition) -> Self {
        Self { spectral }
    }

    /// Diagonal observable in the computational basis.
    pub fn standard(dim: usize) -> Result<Self> {
        Ok(Self { spectral: SpectralDecomposition::standard(dim)? })
    }

    pub fn from_hermitian(matrix: &ComplexMatrix, tol: f64) -> Result<Self> {
        Ok(Self { spectral: hermitian_eigen(matrix, tol)? })
    }

    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spectral
    }

    pub fn eigenvector(&self, n: usize) -> Result<&ComplexVector> {
        self.spectral.eigenvectors().get(n).ok_or(Error::IndexOutOfRange { index: n, dim: self.dim() })
    }
}

/// `P_n = |n><n|`.
pub fn projector(obs: &Observable, n: usize) -> Result<ComplexMatrix> {
    obs.spectral.projector(n)
}

/// `p(A_n) = Tr ρ P_n`.
pub fn event_probability(rho: &DensityOperator, obs: &Observable, n: usize) -> Result<f64> {
    check_dims(rho.dim(), obs.dim())?;
    let v = obs.eigenvector(n)?;
    clamp_probability(rho.matrix.sandwich(v, v)?.re)
}

/// Probability of a standard (orthogonal) union; additive by construction.
pub fn union_probability(rho: &DensityOperator, obs: &Observable, indices: &[usize]) -> Result<f64> {
    check_dims(rho.dim(), obs.dim())?;
    check_index_set(indices, obs.dim())?;
    let mut total = 0.0;
    for &n in indices {
        let v = obs.eigenvector(n)?;
        total += rho.matrix.sandwich(v, v)?.re;
    }
    clamp_probability(total)
}

pub(crate) fn check_index_set(indices: &[usize], dim: usize) -> Result<()> {
    let mut seen = HashSet::with_capacity(indices.len());
    for &n in indices {
        if n >= dim {
            return Err(Error::IndexOutOfRange { index: n, dim });
        }
        if !seen.insert(n) {
            return Err(Error::DuplicateIndex(n));
        }
    }
    Ok(())
}

/// Clamp rounding dust into `[0, 1]`; larger excursions are logic errors.
pub(crate) fn clamp_probability(value: f64) -> Result<f64> {
    if !value.is_finite() || !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&value) {
        return Err(Error::ProbabilityOutOfRange { value });
    }
    Ok(value.clamp(0.0, 1.0))
}
