use thiserror::Error;

/// Errors raised by the toolkit. Verification failures are not errors: they
/// are reported as data (defects, violations) by the checking operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pole at {location}")]
    Pole { location: String },

    #[error("point {location} lies within {radius} of the pole at {pole}")]
    PoleProximity {
        location: String,
        pole: i64,
        radius: f64,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient envelope extrema: found {found}, need at least {needed}")]
    InsufficientExtrema { found: usize, needed: usize },

    #[error("insufficient sign changes: found {found}, need at least {needed}")]
    InsufficientSignChanges { found: usize, needed: usize },

    #[error("|D| fell to {modulus:e} on the boundary near {location}")]
    BoundaryZero { location: String, modulus: f64 },

    #[error("derivative underflow at {location}: |D'| = {modulus:e}")]
    DerivativeUnderflow { location: String, modulus: f64 },

    #[error("solver residual {residual:e} exceeds tolerance {tol:e}; use a finer step")]
    ToleranceNotMet { residual: f64, tol: f64 },

    #[error("exact value at index {0} is zero; relative error undefined")]
    ZeroInPrefix(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
