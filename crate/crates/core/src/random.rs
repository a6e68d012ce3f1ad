//! Random instances for property checks and the `verify` suite.
//!
//! Pure states are normalized complex Gaussian vectors; mixed states are
//! convex mixtures of `d` such pure states with uniformly drawn weights.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::events::{DensityOperator, Observable};
use crate::linalg::{hermitian_eigen, outer, ComplexMatrix, ComplexVector, DEFAULT_TOL};
use crate::prospects::CompositeState;
use crate::uncertain::ModeWeights;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    ComplexVector::new((0..dim).map(|_| gaussian(rng)).collect()).expect("gaussian entries are finite")
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let a = random_matrix(dim, dim, rng);
    (&a + &a.adjoint()).scale_real(0.5)
}

/// Normalized pure state vector.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexVector {
    loop {
        let v = random_vector(dim, rng);
        if v.norm() > 1e-8 {
            return v.normalized().expect("nonzero vector");
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    DensityOperator::pure(&random_pure_vector(dim, rng)).expect("normalized pure state is valid")
}

/// Full-rank mixture of `dim` random pure states.
pub fn random_mixed_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let weights: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for w in weights {
        let v = random_pure_vector(dim, rng);
        rho = &rho + &outer(&v, &v).scale_real(w / total);
    }
    DensityOperator::new(rho, DEFAULT_TOL).expect("convex mixture of pure states is valid")
}

/// Observable with a random (almost surely non-degenerate) eigenbasis.
pub fn random_observable<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Observable {
    let spectral = hermitian_eigen(&random_hermitian(dim, rng), DEFAULT_TOL).expect("random Hermitian diagonalizes");
    Observable::new(spectral)
}

pub fn random_weights<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ModeWeights {
    ModeWeights::normalize(random_vector(dim, rng).into_vec()).expect("nonzero gaussian weights")
}

/// Random (generically entangled) pure state on `dim_a ⊗ dim_b`.
pub fn random_entangled_state<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> CompositeState {
    CompositeState::new(random_pure_state(dim_a * dim_b, rng), dim_a, dim_b).expect("dimensions agree")
}
