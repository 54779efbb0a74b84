use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// (n, k, d) or another argument violates a precondition.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// d - k + 1 outside {2, 3, 4}.
    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),

    /// The required field is larger than the built-in modulus table.
    #[error("unsupported scale: {0}")]
    UnsupportedScale(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular matrix: no pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unrecoverable: {erased} erasures exceed the {max} the code tolerates")]
    Unrecoverable { erased: usize, max: usize },

    #[error("invalid helper set: {0}")]
    InvalidHelpers(String),

    /// A construction invariant failed; indicates a bug or a corrupted coefficient table.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by a broken construction rather than by caller input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Internal(_) | Error::SingularMatrix { .. })
    }
}
