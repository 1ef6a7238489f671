//! Error type shared across the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The norm grammar could not be parsed; `pos` is a byte offset into the input.
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    /// The expression parsed but violates a structural invariant
    /// (p < 1, non-SPD matrix, asymmetric polygon, mismatched child dims, ...).
    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("zero vector not allowed: {0}")]
    ZeroVector(&'static str),

    /// A numeric-domain precondition failed (t = 0, |alpha - beta| in {0, pi},
    /// dependent probe directions, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("not dualizable in closed form: {0}")]
    NotDualizable(String),
}

impl Error {
    /// True for errors produced while reading a norm expression
    /// (the CLI maps these to exit code 2, everything else to 3).
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Syntax { .. } | Error::InvalidNorm(_))
    }
}
