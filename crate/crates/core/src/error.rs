use thiserror::Error;

/// Errors raised by the fishnet library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid mesh geometry.
    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// Malformed input data (strength lists, damage sets, parameters).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The surviving links no longer join the two loaded boundaries.
    #[error("structure is disconnected")]
    Disconnected,

    /// The reduced stiffness system could not be factorized or did not converge.
    #[error("linear solver failure: {0}")]
    Solver(String),

    /// A fit had no usable data or no solution.
    #[error("fit failed: {0}")]
    Fit(String),

    /// A probability expression hit a pole.
    #[error("pole: {0}")]
    Pole(String),

    /// Engine invariant broken; indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
