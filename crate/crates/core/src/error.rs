use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("local dimensions must be at least 2 (got d_C = {d_c}, d_H = {d_h})")]
    InvalidDims { d_c: usize, d_h: usize },

    #[error("matrix is not Hermitian (max |M - M^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid energy spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("degenerate Bohr spectrum: gaps {0} and {1} coincide")]
    DegenerateBohrSpectrum(String, String),

    #[error("rotation manifold ({0}, {1}) supplied more than once")]
    DuplicateManifold(usize, usize),

    #[error("infeasible state: {0}")]
    Infeasible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("divergent quantity: {0}")]
    Divergence(String),

    #[error("resonance violated: |dE_C + dE_H| = {mismatch:e} exceeds tolerance {tolerance:e}")]
    ResonanceViolation { mismatch: f64, tolerance: f64 },

    #[error("logarithm undefined: argument {0} <= 0")]
    LogDomain(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
