//! Quantum probabilities for multimode measurements.
//!
//! The crate covers projective events ([`events`]), uncertain unions with
//! their interference term ([`uncertain`]), composite prospects on tensor
//! product spaces ([`prospects`]), the distribution of the interference
//! factor ([`quarterlaw`]), and a stochastic two-mode condensate model
//! whose noise-induced population shifts play the role of a time-dependent
//! interference factor ([`becsim`]).

pub mod becsim;
pub mod cli;
pub mod error;
pub mod events;
pub mod linalg;
pub mod numerics;
pub mod prospects;
pub mod quarterlaw;
pub mod random;
pub mod uncertain;

pub use error::{Error, Result};
