use alloc::string::String;

/// Errors raised by the geometric and numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite component in {0}")]
    NonFinite(&'static str),

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("signature error: {0}")]
    Signature(String),

    #[error("not a unit vector: {0}")]
    NotUnit(String),

    #[error("not a Lorentz map: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotLorentz { residual: f64, tolerance: f64 },

    #[error("matrix is not symmetric: asymmetry {0:.3e}")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite: smallest eigenvalue {0:.3e}")]
    NotPositiveDefinite(f64),

    #[error("invalid contact point: {0}")]
    InvalidContactPoint(String),

    #[error("invalid lagrangian frame: {0}")]
    InvalidFrame(String),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("left the convex branch: {0}")]
    BranchDeparture(String),

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid height field: {0}")]
    InvalidField(String),
}

pub type Result<T> = core::result::Result<T, Error>;
