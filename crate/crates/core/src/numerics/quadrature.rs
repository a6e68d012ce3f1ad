//! Adaptive Gauss–Legendre quadrature, with an endpoint-aware driver for
//! beta-type kernels `x^{a-1} (1-x)^{b-1}`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 60;

/// Nodes and weights of the `ORDER`-point rule on `[-1, 1]`.
fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(ORDER))
}

/// Roots of `P_n` by Newton iteration from the Chebyshev-like guess.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = rule();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * nodes.iter().zip(weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol` by recursive
/// bisection, comparing the rule on an interval against its two halves.
pub fn adaptive_gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let whole = fixed(&f, a, b);
    recurse(&f, a, b, whole, tol, 0)
}

fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = fixed(f, a, m);
    let right = fixed(f, m, b);
    let refined = left + right;
    let err = (refined - whole).abs();
    if !refined.is_finite() {
        return Err(Error::QuadratureNoConvergence { tol, estimate: err });
    }
    if err <= tol.max(16.0 * f64::EPSILON * refined.abs()) {
        return Ok(refined);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureNoConvergence { tol, estimate: err });
    }
    Ok(recurse(f, a, m, left, 0.5 * tol, depth + 1)? + recurse(f, m, b, right, 0.5 * tol, depth + 1)?)
}

/// `∫_0^1 x^{a-1} (1-x)^{b-1} dx` for `a, b > 0`.
///
/// The interval is split at 1/2 and each half is mapped so that its
/// endpoint power sits at zero, where `y = u^k` turns `y^{p-1}` into the
/// smooth weight `k u^{kp-1}` (and removes the singularity when `p < 1`).
pub fn beta_kernel_integral(a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!("beta kernel needs positive exponents, got ({a}, {b})")));
    }
    Ok(half_kernel(a, b, 0.5 * tol)? + half_kernel(b, a, 0.5 * tol)?)
}

/// `∫_0^{1/2} y^{p-1} (1-y)^{r-1} dy`.
fn half_kernel(p: f64, r: f64, tol: f64) -> Result<f64> {
    let smooth = |y: f64| (1.0 - y).powf(r - 1.0);
    let c = p - 1.0;
    let polynomial = c >= 0.0 && c.fract() == 0.0;
    let k = (4.0 / p).ceil();
    if polynomial || k < 2.0 {
        return adaptive_gauss_legendre(|y| y.powf(c) * smooth(y), 0.0, 0.5, tol);
    }
    let ki = k as i32;
    let upper = 0.5f64.powf(1.0 / k);
    adaptive_gauss_legendre(|u| k * u.powf(k * p - 1.0) * smooth(u.powi(ki)), 0.0, upper, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::beta;

    #[test]
    fn rule_weights_sum_to_two() {
        let (nodes, weights) = rule();
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn polynomials_are_exact() {
        // order-20 rule integrates degree 39 exactly
        let v = adaptive_gauss_legendre(|x| x.powi(39) + x.powi(10), 0.0, 1.0, 1e-14).unwrap();
        assert!((v - (1.0 / 40.0 + 1.0 / 11.0)).abs() < 1e-14);
    }

    #[test]
    fn smooth_transcendental() {
        let v = adaptive_gauss_legendre(f64::sin, 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn beta_kernel_matches_closed_form() {
        for &(a, b) in &[(1.0, 1.0), (0.5, 0.5), (0.3, 7.0), (3.0, 7.0), (10.0, 0.3), (2.5, 1.5)] {
            let v = beta_kernel_integral(a, b, 1e-12).unwrap();
            assert!((v - beta(a, b)).abs() < 1e-10 * beta(a, b).max(1.0), "({a},{b}): {v} vs {}", beta(a, b));
        }
    }

    #[test]
    fn beta_kernel_rejects_nonpositive() {
        assert!(beta_kernel_integral(0.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn nonconvergence_is_reported() {
        let r = adaptive_gauss_legendre(|x| 1.0 / x, 0.0, 1.0, 1e-12);
        assert!(r.is_err());
    }
}
