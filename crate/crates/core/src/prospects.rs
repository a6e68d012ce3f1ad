//! Composite events on `H_A ⊗ H_B`: joint probabilities, prospect operators
//! `|n>⊗|B>`, and the split of a prospect probability into a diagonal part
//! `f` and an interference factor `q`.
//!
//! Basis convention: factor bases are the computational bases, and the
//! composite index of `|n α>` is `n·d_B + α`. States expressed in another
//! eigenbasis can be brought here with [`rotate_into_eigenbases`].

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::events::{check_index_set, clamp_probability, DensityOperator, Observable};
use crate::linalg::{check_dims, outer, ComplexMatrix, ComplexVector};
use crate::uncertain::{ModeWeights, IMAGINARY_RESIDUE_TOL};

/// Threshold below which a prospect family cannot be renormalized.
pub const DEGENERATE_SUM: f64 = 1e-12;

/// A density operator on a bipartite space with known factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    rho: DensityOperator,
    dim_a: usize,
    dim_b: usize,
}

impl CompositeState {
    pub fn new(rho: DensityOperator, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Empty);
        }
        check_dims(dim_a * dim_b, rho.dim())?;
        Ok(Self { rho, dim_a, dim_b })
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// `<nα|ρ|mβ>`.
    fn element(&self, n: usize, alpha: usize, m: usize, beta: usize) -> Complex64 {
        self.rho.matrix()[(n * self.dim_b + alpha, m * self.dim_b + beta)]
    }

    pub fn marginal_a(&self) -> ComplexMatrix {
        self.rho.matrix().partial_trace_b(self.dim_a, self.dim_b).expect("dimensions checked at construction")
    }

    pub fn marginal_b(&self) -> ComplexMatrix {
        self.rho.matrix().partial_trace_a(self.dim_a, self.dim_b).expect("dimensions checked at construction")
    }

    /// Zero the `<nα|ρ|nβ>` elements with `α ≠ β`, the exact set feeding
    /// the interference factor.
    pub fn dephased(&self) -> Self {
        let db = self.dim_b;
        let m = self.rho.matrix();
        let out = ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            let (n, alpha) = (i / db, i % db);
            let (k, beta) = (j / db, j % db);
            if n == k && alpha != beta {
                Complex64::new(0.0, 0.0)
            } else {
                m[(i, j)]
            }
        });
        // Still Hermitian with unit trace, but zeroing off-diagonal blocks
        // can break positivity, so this is an operator family, not a checked state.
        Self { rho: DensityOperator::from_trusted(out), dim_a: self.dim_a, dim_b: self.dim_b }
    }

    /// `(1-λ)·dephased + λ·ρ`.
    pub fn decohered(&self, lambda: f64) -> Self {
        let d = self.dephased();
        let m = &d.rho.matrix().scale_real(1.0 - lambda) + &self.rho.matrix().scale_real(lambda);
        Self { rho: DensityOperator::from_trusted(m), dim_a: self.dim_a, dim_b: self.dim_b }
    }
}

/// `π_n = A_n ⊗ ⨄_α B_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prospect {
    pub n: usize,
    pub weights: ModeWeights,
}

impl Prospect {
    pub fn new(n: usize, weights: ModeWeights) -> Self {
        Self { n, weights }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Quantities exactly as defined by the prospect state and the weights.
    Raw,
    /// `f` and `p` rescaled to sum to one; `q = p - f`.
    Normalized,
}

/// The families `p(π_n)`, `f(π_n)`, `q(π_n)` over `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProspectResult {
    pub p: Vec<f64>,
    pub f: Vec<f64>,
    pub q: Vec<f64>,
    pub mode: Normalization,
}

impl ProspectResult {
    pub fn max_abs_q(&self) -> f64 {
        self.q.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest violation of the measure axioms (`Σp = Σf = 1`, `Σq = 0`,
    /// `p, f ∈ [0,1]`, `q ∈ [-1,1]`, `p = f + q`).
    pub fn axiom_violation(&self) -> f64 {
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        let outside = |x: f64, lo: f64, hi: f64| (lo - x).max(x - hi).max(0.0);
        let mut worst = (sum(&self.p) - 1.0).abs().max((sum(&self.f) - 1.0).abs()).max(sum(&self.q).abs());
        for i in 0..self.p.len() {
            worst = worst
                .max(outside(self.p[i], 0.0, 1.0))
                .max(outside(self.f[i], 0.0, 1.0))
                .max(outside(self.q[i], -1.0, 1.0))
                .max((self.p[i] - self.f[i] - self.q[i]).abs());
        }
        worst
    }
}

/// `Tr ρ (P_n ⊗ P_α)`.
pub fn joint_probability(state: &CompositeState, n: usize, alpha: usize) -> Result<f64> {
    check_index(n, state.dim_a)?;
    check_index(alpha, state.dim_b)?;
    clamp_probability(state.element(n, alpha, n, alpha).re)
}

/// Probability of `A_n ⊗ (∪_{α∈alphas} B_α)` with a standard union; additive.
pub fn standard_union_probability(state: &CompositeState, n: usize, alphas: &[usize]) -> Result<f64> {
    check_index(n, state.dim_a)?;
    check_index_set(alphas, state.dim_b)?;
    clamp_probability(alphas.iter().map(|&a| state.element(n, a, n, a).re).sum())
}

/// `|π_n> = |n> ⊗ |B>`.
pub fn prospect_state(pr: &Prospect, dim_a: usize) -> Result<ComplexVector> {
    check_index(pr.n, dim_a)?;
    let a = ComplexVector::basis(dim_a, pr.n)?;
    let b = ComplexVector::new(pr.weights.as_slice().to_vec())?;
    Ok(a.kron(&b))
}

/// `P(π_n) = |π_n><π_n|`.
pub fn prospect_operator(pr: &Prospect, dim_a: usize) -> Result<ComplexMatrix> {
    let v = prospect_state(pr, dim_a)?;
    Ok(outer(&v, &v))
}

/// Prospect probabilities for every `n` with the common B-weights `b`.
pub fn prospect_probabilities(state: &CompositeState, b: &ModeWeights, mode: Normalization) -> Result<ProspectResult> {
    check_dims(state.dim_b, b.len())?;
    let w = b.as_slice();
    let (da, db) = (state.dim_a, state.dim_b);
    let mut p = Vec::with_capacity(da);
    let mut f = Vec::with_capacity(da);
    let mut q = Vec::with_capacity(da);
    for n in 0..da {
        let mut diag = 0.0;
        let mut inter = Complex64::new(0.0, 0.0);
        for alpha in 0..db {
            diag += w[alpha].norm_sqr() * state.element(n, alpha, n, alpha).re;
            for beta in 0..db {
                if alpha != beta {
                    inter += w[alpha].conj() * w[beta] * state.element(n, alpha, n, beta);
                }
            }
        }
        if inter.im.abs() >= IMAGINARY_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue { value: inter.im });
        }
        f.push(diag);
        q.push(inter.re);
        p.push(diag + inter.re);
    }
    match mode {
        Normalization::Raw => Ok(ProspectResult { p, f, q, mode }),
        Normalization::Normalized => {
            let sum_p: f64 = p.iter().sum();
            let sum_f: f64 = f.iter().sum();
            if sum_p < DEGENERATE_SUM {
                return Err(Error::DegenerateProspect { sum: sum_p });
            }
            if sum_f < DEGENERATE_SUM {
                return Err(Error::DegenerateProspect { sum: sum_f });
            }
            let p: Vec<f64> = p.iter().map(|x| x / sum_p).collect();
            let f: Vec<f64> = f.iter().map(|x| x / sum_f).collect();
            let q = p.iter().zip(&f).map(|(a, b)| a - b).collect();
            Ok(ProspectResult { p, f, q, mode })
        }
    }
}

/// `ρ_A ⊗ ρ_B`.
pub fn product_state(rho_a: &DensityOperator, rho_b: &DensityOperator) -> CompositeState {
    let m = rho_a.matrix().kron(rho_b.matrix()).expect("small factors");
    CompositeState { rho: DensityOperator::from_trusted(m), dim_a: rho_a.dim(), dim_b: rho_b.dim() }
}

/// `|ψ> = M^{-1/2} Σ_m |mm>` as a density operator on `M ⊗ M`.
pub fn max_entangled_state(modes: usize) -> Result<CompositeState> {
    if modes < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 modes, got {modes}")));
    }
    let amp = 1.0 / (modes as f64).sqrt();
    let mut psi = ComplexVector::zeros(modes * modes).into_vec();
    for m in 0..modes {
        psi[m * modes + m] = Complex64::new(amp, 0.0);
    }
    let rho = DensityOperator::pure(&ComplexVector::new(psi)?)?;
    CompositeState::new(rho, modes, modes)
}

/// Entanglement-production measure of [`max_entangled_state`]: `log₂ M`.
pub fn entanglement_measure_maxstate(modes: usize) -> Result<f64> {
    if modes < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 modes, got {modes}")));
    }
    Ok((modes as f64).log2())
}

/// Conjugate `ρ` by `(U_A ⊗ U_B)†` so that the observables' eigenbases
/// become the computational bases.
pub fn rotate_into_eigenbases(
    state: &CompositeState,
    obs_a: &Observable,
    obs_b: &Observable,
) -> Result<CompositeState> {
    check_dims(state.dim_a, obs_a.dim())?;
    check_dims(state.dim_b, obs_b.dim())?;
    let u = obs_a.spectral().unitary().kron(&obs_b.spectral().unitary())?;
    let m = u.adjoint().matmul(state.rho.matrix())?.matmul(&u)?;
    Ok(CompositeState { rho: DensityOperator::from_trusted(m), dim_a: state.dim_a, dim_b: state.dim_b })
}

fn check_index(index: usize, dim: usize) -> Result<()> {
    if index < dim {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { index, dim })
    }
}
