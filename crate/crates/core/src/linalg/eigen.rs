//! Cyclic complex Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64;

use super::{outer, ComplexMatrix, ComplexVector, ZERO};
use crate::error::{Error, Result};

/// Largest dimension accepted by [`hermitian_eigen`].
pub const MAX_EIGEN_DIM: usize = 64;

const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) with an orthonormal set of eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<ComplexVector>,
}

impl SpectralDecomposition {
    /// Assemble from explicit parts, checking orthonormality within `tol`.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: Vec<ComplexVector>, tol: f64) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Empty);
        }
        if eigenvalues.len() != eigenvectors.len() {
            return Err(Error::DimensionMismatch { expected: eigenvalues.len(), found: eigenvectors.len() });
        }
        if eigenvalues.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let d = eigenvectors.len();
        for v in &eigenvectors {
            if v.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.dim() });
            }
        }
        let s = Self { eigenvalues, eigenvectors };
        let dev = s.orthonormality_error();
        if dev >= tol {
            return Err(Error::InvalidParameter(format!(
                "eigenvectors are not orthonormal (max Gram deviation {dev:e})"
            )));
        }
        Ok(s)
    }

    /// The computational basis with eigenvalues `0, 1, ..., d-1`.
    pub fn standard(dim: usize) -> Result<Self> {
        let vecs = (0..dim).map(|k| ComplexVector::basis(dim, k)).collect::<Result<Vec<_>>>()?;
        Self::from_parts((0..dim).map(|k| k as f64).collect(), vecs, 1e-12)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[ComplexVector] {
        &self.eigenvectors
    }

    /// `|n><n|` for the `n`-th eigenvector.
    pub fn projector(&self, n: usize) -> Result<ComplexMatrix> {
        let v = self.eigenvectors.get(n).ok_or(Error::IndexOutOfRange { index: n, dim: self.dim() })?;
        Ok(outer(v, v))
    }

    /// `Σ_n A_n |n><n|`.
    pub fn recompose(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..d {
                for j in 0..d {
                    m[(i, j)] += v[i] * v[j].conj() * *lambda;
                }
            }
        }
        m
    }

    /// Unitary whose columns are the eigenvectors.
    pub fn unitary(&self) -> ComplexMatrix {
        let d = self.dim();
        ComplexMatrix::from_fn(d, d, |i, j| self.eigenvectors[j][i])
    }

    /// Max-norm deviation of the eigenvector Gram matrix from identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut dev = 0.0f64;
        for (m, u) in self.eigenvectors.iter().enumerate() {
            for (n, v) in self.eigenvectors.iter().enumerate().skip(m) {
                let g = u.inner(v).unwrap_or(Complex64::new(f64::NAN, 0.0));
                let target = if m == n { 1.0 } else { 0.0 };
                dev = dev.max((g - target).norm());
            }
        }
        dev
    }
}

/// Diagonalize a Hermitian matrix with cyclic complex Jacobi rotations.
///
/// Eigenvalues come back sorted ascending. Eigenvectors within a degenerate
/// cluster are an arbitrary orthonormal basis of that eigenspace.
pub fn hermitian_eigen(a: &ComplexMatrix, tol: f64) -> Result<SpectralDecomposition> {
    let n = a.square_dim()?;
    if n > MAX_EIGEN_DIM {
        return Err(Error::InvalidParameter(format!("dimension {n} exceeds eigensolver limit {MAX_EIGEN_DIM}")));
    }
    let deviation = a.hermitian_deviation()?;
    if deviation >= tol {
        return Err(Error::NotHermitian { deviation });
    }

    // Work on the exactly-Hermitian part.
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);

    let threshold = f64::EPSILON * frobenius(&m);
    let mut sweeps = 0;
    while off_diagonal(&m) > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = order.iter().map(|&j| v.column(j)).collect();
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// Annihilate `m[p][q]` with the unitary `U = D·R`, where `D` removes the
/// phase of `m[p][q]` and `R` is the real symmetric Jacobi rotation.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = apq / r; // e^{i phi}
    let theta = (aqq - app) / (2.0 * r);
    let t =
        if theta.is_infinite() { 0.5 / theta } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = -phase.conj() * s;
    let u_qq = phase.conj() * c;

    let n = m.rows();
    // columns: M <- M U, V <- V U
    for k in 0..n {
        let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
        m[(k, p)] = mkp * u_pp + mkq * u_qp;
        m[(k, q)] = mkp * u_pq + mkq * u_qq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
    // rows: M <- U† M
    for k in 0..n {
        let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
        m[(p, k)] = u_pp.conj() * mpk + u_qp.conj() * mqk;
        m[(q, k)] = u_pq.conj() * mpk + u_qq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(app - t * r, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * r, 0.0);
}

fn off_diagonal(m: &ComplexMatrix) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn frobenius(m: &ComplexMatrix) -> f64 {
    m.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gram_and_completeness(s: &SpectralDecomposition) -> (f64, f64) {
        let d = s.dim();
        let mut sum = ComplexMatrix::zeros(d, d);
        for n in 0..d {
            sum = &sum + &s.projector(n).unwrap();
        }
        (s.orthonormality_error(), sum.max_abs_diff(&ComplexMatrix::identity(d)).unwrap())
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let s = hermitian_eigen(&ComplexMatrix::identity(3), 1e-10).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = hermitian_eigen(&x, 1e-10).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_y_complex_entries() {
        let y =
            ComplexMatrix::new(2, 2, vec![ZERO, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), ZERO]).unwrap();
        let s = hermitian_eigen(&y, 1e-10).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!(s.recompose().max_abs_diff(&y).unwrap() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [1usize, 2, 5, 8, 16, 33, 64] {
            let h = random_hermitian(d, &mut rng);
            let s = hermitian_eigen(&h, 1e-10).unwrap();
            assert!(s.recompose().max_abs_diff(&h).unwrap() < 1e-10, "d={d}");
            let (gram, completeness) = gram_and_completeness(&s);
            assert!(gram < 1e-10 && completeness < 1e-10, "d={d}");
            assert!(s.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
            for (n, v) in s.eigenvectors().iter().enumerate() {
                let hv = h.apply(v).unwrap();
                let res = hv.max_abs_diff(&v.scale(Complex64::new(s.eigenvalues()[n], 0.0))).unwrap();
                assert!(res < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_spectrum_still_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let u = hermitian_eigen(&random_hermitian(4, &mut rng), 1e-10).unwrap().unitary();
        let d = ComplexMatrix::from_real_diag(&[2.0, 2.0, -1.0, 2.0]);
        let h = u.matmul(&d).unwrap().matmul(&u.adjoint()).unwrap();
        let s = hermitian_eigen(&h, 1e-10).unwrap();
        assert!(s.recompose().max_abs_diff(&h).unwrap() < 1e-12);
        assert!(s.orthonormality_error() < 1e-12);
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigen(&a, 1e-10), Err(Error::NotHermitian { .. })));
        assert!(matches!(hermitian_eigen(&ComplexMatrix::zeros(2, 3), 1e-10), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn from_parts_checks_orthonormality() {
        let v = ComplexVector::from_real(&[1.0, 0.0]).unwrap();
        let w = ComplexVector::from_real(&[1.0, 1.0]).unwrap();
        assert!(SpectralDecomposition::from_parts(vec![0.0, 1.0], vec![v, w], 1e-10).is_err());
    }
}
