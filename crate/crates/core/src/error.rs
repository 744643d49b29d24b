use thiserror::Error;

/// Errors produced by the estimator library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Lattice vectors are (nearly) linearly dependent or left-handed.
    #[error("degenerate cell: {0}")]
    DegenerateCell(String),

    /// The Gramian failed the positive-definiteness check.
    #[error("gramian is not positive definite (pivot {pivot:e})")]
    NotPositiveDefinite { pivot: f64 },

    /// Malformed pseudopotential text.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A momentum-space quantity was evaluated where it diverges.
    #[error("divergent evaluation: {0}")]
    Divergent(&'static str),

    /// An argument is outside the documented domain of an operation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A requested computation is too large to run with the chosen strategy.
    #[error("infeasible request: {0}")]
    Infeasible(String),

    /// A label (species or bundled structure) is unknown.
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    /// Numerical integration did not converge.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
