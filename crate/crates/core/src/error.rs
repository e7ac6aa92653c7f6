use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ensemble must contain at least one path")]
    EmptyEnsemble,

    #[error("amplitude at index {index} has modulus {modulus}, expected 1")]
    NonUnitAmplitude { index: usize, modulus: f64 },

    #[error("segment {segment} has non-positive duration {dt}")]
    DegenerateSegment { segment: usize, dt: f64 },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("time mismatch: {0}")]
    TimeMismatch(String),

    #[error("paths do not share endpoints")]
    EndpointMismatch,

    #[error("incompatible time grids: {0}")]
    IncompatibleGrids(String),

    #[error("composite structure mismatch: {0}")]
    StructureMismatch(String),

    #[error("symmetrisation over {n} components exceeds the limit of {limit}")]
    TooManyComponents { n: usize, limit: usize },

    #[error("invalid distance: {0}")]
    InvalidDistance(String),

    #[error("every path has zero probability weight; normalisation impossible")]
    AllZeroProbability,

    #[error("spec violation: {0}")]
    SpecViolation(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("model has {paths} composite paths, above the limit of {limit}")]
    ModelTooLarge { paths: u64, limit: u64 },

    #[error("argument path is anti-causal")]
    AntiCausalArgument,

    #[error("plain d2 requires a causal first argument")]
    NonCausalPlainArgument,

    #[error("no lattice path connects the endpoints")]
    NoPaths,

    #[error("enumeration bound {bound} exceeds the limit of {limit}")]
    TooManyPaths { bound: u64, limit: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
