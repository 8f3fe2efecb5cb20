use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum FractalError {
    /// Two set representations cannot be compared (different kind, dimension
    /// or grid level).
    #[error("representation mismatch: {0}")]
    RepresentationMismatch(String),

    /// An argument is outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested tolerance or scale cannot be met by the representation.
    /// The message names the finest feasible value.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A map failed one of its construction-time certificates.
    #[error("invalid map: {0}")]
    InvalidMap(String),

    /// A composed Jacobian is numerically singular, violating the
    /// diffeomorphism precondition.
    #[error("singular Jacobian: {0}")]
    Singular(String),

    /// Word enumeration exceeded its budget.
    #[error("word cap exceeded: {0}")]
    CapExceeded(String),

    /// An operation was called on an empty set.
    #[error("empty set: {0}")]
    EmptySet(String),

    /// A stated precondition does not hold for the given inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A dimension bracket cannot be formed because nk <= D(n) + Q(n).
    #[error("degenerate bracket: {0}")]
    DegenerateBracket(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, FractalError>;
