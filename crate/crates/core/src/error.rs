use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("invalid word `{0}`")]
    InvalidWord(String),

    #[error("expression is not expandable as a power series: {0}")]
    NotExpandable(String),

    #[error("matrix inverse requested at a singular point (reciprocal condition {rcond:.3e})")]
    SingularInverse { rcond: f64 },

    #[error("principal logarithm undefined: eigenvalue {re:.6}{im:+.6}i lies on the closed negative real axis")]
    LogBranchViolation { re: f64, im: f64 },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds {allowed:.3e})")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("truncation too deep: need coefficients of degree {needed}, series is truncated at {available}")]
    TruncationTooDeep { needed: usize, available: usize },

    #[error("not pluriharmonic: mixed word `{word}` has a nonzero coefficient")]
    NotPluriharmonic { word: String },

    #[error("series is not self-adjoint (deviation {deviation:.3e})")]
    NotSelfAdjoint { deviation: f64 },

    #[error("Gram matrix C{kind} is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    GramNotPsd { kind: &'static str, min_eig: f64 },

    #[error("inconsistent word action: {0}")]
    InconsistentAction(String),

    #[error("word `{word}` lies outside the realization truncation")]
    OutOfTruncation { word: String },

    #[error("T(Z) is not a strict contraction (norm {norm:.6})")]
    TNotContractive { norm: f64 },

    #[error("resolvent is singular or not positive definite (min eigenvalue {min_eig:.3e})")]
    ResolventSingular { min_eig: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("path endpoints do not match (deviation {deviation:.3e})")]
    EndpointMismatch { deviation: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
