use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator {label} is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { label: String, deviation: f64 },

    #[error("eigen-solver failed to converge on a {dim}x{dim} matrix")]
    NumericalFailure { dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("could not recover atoms of the intersection of {left} and {right} after {retries} retries")]
    DegenerateIntersection {
        left: String,
        right: String,
        retries: usize,
    },

    #[error("size limit exceeded: {what} would exceed {limit}")]
    SizeLimitExceeded { what: String, limit: usize },

    #[error("operator {label} is not an orthogonal projection (idempotency defect {defect:.3e})")]
    NotProjection { label: String, defect: f64 },

    #[error("restriction of atom {atom} of {from} to {to} is dominated by {candidates} atoms")]
    RestrictionAmbiguous {
        from: String,
        to: String,
        atom: usize,
        candidates: usize,
    },

    #[error("restriction triangle {upper} -> {middle} -> {lower} does not commute")]
    FunctorialityViolation {
        upper: String,
        middle: String,
        lower: String,
    },

    #[error("subobjects belong to different spectral presheaves")]
    PresheafMismatch,

    #[error("state vector is not normalised (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("truth value at root {root} is not downward closed")]
    NotASieve { root: String },

    #[error("unbound symbol {0}")]
    UnboundSymbol(String),

    #[error("expression is missing designated symbol {0}")]
    MissingSymbol(String),

    #[error("stage operator at {context} does not lie in its context (residual {residual:.3e})")]
    NotInContext { context: String, residual: f64 },

    #[error("invalid stage map at {context}: {reason}")]
    InvalidStageMap { context: String, reason: String },

    #[error("2-cells are not composable: {0}")]
    NotComposable(String),

    #[error("invalid finite category: {0}")]
    InvalidCategory(String),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
