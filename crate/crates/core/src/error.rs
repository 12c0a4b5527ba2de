use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot normalize a zero vector (norm {norm:e})")]
    ZeroVector { norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid subsystem dims {dims:?}: {reason}")]
    BadDims {
        dims: Vec<usize>,
        reason: &'static str,
    },

    #[error("subsystem {keep} is not valid for dims {dims:?}")]
    BadSubsystem { keep: usize, dims: Vec<usize> },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid noise spec: {0}")]
    InvalidNoise(String),

    #[error("invalid detector spectrum: {0}")]
    BadSpectrum(String),

    #[error("invalid spin chain: {0}")]
    InvalidChain(String),

    #[error("{what} of size {size} exceeds the cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("integrator norm drift {drift:e} exceeds bound {bound:e}")]
    StepUnstable { drift: f64, bound: f64 },

    #[error("product-form evolution requires zero coupling, got J = {coupling}")]
    NotProductForm { coupling: f64 },

    #[error("sample count must be at least 1")]
    NoSamples,
}
