//! Scalar numerics shared by the distribution layer.

pub mod quadrature;
pub mod special;

pub use quadrature::{adaptive_gauss_legendre, beta_kernel_integral};
pub use special::{beta, ln_beta, ln_gamma};
