use thiserror::Error;

/// Failures raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("product would hold {entries} entries (limit {limit})")]
    TooLarge { entries: usize, limit: usize },

    #[error("matrix is not Hermitian: max |A - A^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("empty input")]
    Empty,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("duplicate index {0}")]
    DuplicateIndex(usize),

    #[error("invalid density operator: {0}")]
    InvalidState(String),

    #[error("weights not normalized: sum |w|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("probability {value} outside [0, 1] beyond rounding")]
    ProbabilityOutOfRange { value: f64 },

    #[error("interference term has imaginary residue {value:e}")]
    ImaginaryResidue { value: f64 },

    #[error("degenerate prospect family: sum = {sum:e}")]
    DegenerateProspect { sum: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("q = {q} outside [-1, 1]")]
    OutOfDomain { q: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadratureNoConvergence { tol: f64, estimate: f64 },

    #[error("critical amplitude denominator vanishes ({denominator:e})")]
    DenominatorVanishes { denominator: f64 },

    #[error("step rejected on {} at step {step} (s = {s}): integration left the Bloch sphere", path_label(*.path))]
    StepRejected { path: Option<usize>, step: usize, s: f64 },
}

impl Error {
    /// True for errors caused by bad caller input rather than numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::NotSquare { .. }
                | Error::TooLarge { .. }
                | Error::NotHermitian { .. }
                | Error::NonFinite
                | Error::Empty
                | Error::IndexOutOfRange { .. }
                | Error::DuplicateIndex(_)
                | Error::InvalidState(_)
                | Error::NotNormalized { .. }
                | Error::InvalidParameter(_)
                | Error::OutOfDomain { .. }
        )
    }
}

fn path_label(path: Option<usize>) -> String {
    match path {
        Some(i) => format!("path {i}"),
        None => "the noiseless reference path".into(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
