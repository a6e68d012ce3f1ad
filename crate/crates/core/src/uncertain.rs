//! Operationally uncertain measurements: an uncertain union of events
//! `{A_n}` with complex weights `a_n`, its proposition operator `|A><A|`,
//! and the interference term of its probability.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::{clamp_probability, DensityOperator, Observable};
use crate::linalg::{check_dims, outer, ComplexMatrix, ComplexVector, DEFAULT_TOL};

/// Imaginary residue of an interference sum tolerated before it is treated
/// as an internal error.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

/// Complex amplitudes with `Σ|w|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeWeights {
    weights: Vec<Complex64>,
}

impl ModeWeights {
    /// Strict constructor: the weights must already be normalized within `tol`.
    pub fn new(weights: Vec<Complex64>, tol: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty);
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm_sq: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > tol {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { weights })
    }

    /// Rescale arbitrary nonzero amplitudes to unit norm.
    pub fn normalize(weights: Vec<Complex64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0 });
        }
        Self::new(weights.into_iter().map(|w| w / norm).collect(), DEFAULT_TOL)
    }

    pub fn from_real(weights: &[f64], tol: f64) -> Result<Self> {
        Self::new(weights.iter().map(|&x| Complex64::new(x, 0.0)).collect(), tol)
    }

    /// Equal real amplitudes `1/√d`.
    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        let a = 1.0 / (dim as f64).sqrt();
        Self::new(vec![Complex64::new(a, 0.0); dim], DEFAULT_TOL)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.weights
    }
}

/// Observable plus the weights of its uncertain union.
#[derive(Debug, Clone)]
pub struct UncertainUnion {
    observable: Observable,
    weights: ModeWeights,
}

impl UncertainUnion {
    pub fn new(observable: Observable, weights: ModeWeights) -> Result<Self> {
        check_dims(observable.dim(), weights.len())?;
        Ok(Self { observable, weights })
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn weights(&self) -> &ModeWeights {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Probability of an uncertain union split into its diagonal part and the
/// interference term: `p = diag + q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertainProbability {
    pub p: f64,
    pub diag: f64,
    pub q: f64,
}

/// `|A> = Σ_n a_n |n>` in the ambient basis.
pub fn uncertain_state(u: &UncertainUnion) -> ComplexVector {
    let d = u.dim();
    let mut entries = vec![Complex64::new(0.0, 0.0); d];
    for (a, v) in u.weights.as_slice().iter().zip(u.observable.spectral().eigenvectors()) {
        for (e, vi) in entries.iter_mut().zip(v.as_slice()) {
            *e += a * vi;
        }
    }
    ComplexVector::new(entries).expect("finite combination of finite vectors")
}

/// `P_A = |A><A|`: Hermitian, trace one, generally not idempotent.
pub fn proposition_operator(u: &UncertainUnion) -> ComplexMatrix {
    let a = uncertain_state(u);
    outer(&a, &a)
}

/// Probability of the uncertain event together with its decomposition.
pub fn uncertain_probability(rho: &DensityOperator, u: &UncertainUnion) -> Result<UncertainProbability> {
    check_dims(rho.dim(), u.dim())?;
    let vecs = u.observable.spectral().eigenvectors();
    let a = u.weights.as_slice();
    // ρ_{mn} = <m|ρ|n> in the observable eigenbasis
    let mut elements = vec![Complex64::new(0.0, 0.0); u.dim() * u.dim()];
    for (m, vm) in vecs.iter().enumerate() {
        for (n, vn) in vecs.iter().enumerate() {
            elements[m * u.dim() + n] = rho.matrix().sandwich(vm, vn)?;
        }
    }
    let mut diag = 0.0;
    let mut q = Complex64::new(0.0, 0.0);
    for m in 0..u.dim() {
        diag += a[m].norm_sqr() * elements[m * u.dim() + m].re;
        for n in 0..u.dim() {
            if m != n {
                q += a[m].conj() * a[n] * elements[m * u.dim() + n];
            }
        }
    }
    if q.im.abs() >= IMAGINARY_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue { value: q.im });
    }
    let p = clamp_probability(diag + q.re)?;
    Ok(UncertainProbability { p, diag, q: q.re })
}
