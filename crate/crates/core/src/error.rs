use thiserror::Error;

pub type Result<T> = std::result::Result<T, GtError>;

/// Errors produced by the construction, verification and I/O layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GtError {
    /// Caller supplied arguments that violate an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// Arithmetic outside the operation's domain (e.g. inverting zero).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no prime in [{lo}, {hi})")]
    NoPrime { lo: u64, hi: u64 },

    /// An exhaustive check would exceed the configured enumeration budget.
    #[error("unverifiable at this size: {required} elementary checks exceed budget {budget}")]
    Unverifiable { required: u128, budget: u128 },

    /// Outcomes do not come from any defective set within the decoder's strength.
    #[error("inconsistent outcomes: {0}")]
    Inconsistent(String),

    /// A constructed object failed its post-construction check.
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl GtError {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        GtError::Usage(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        GtError::Parse { line, msg: msg.into() }
    }
}

impl From<std::io::Error> for GtError {
    fn from(e: std::io::Error) -> Self {
        GtError::Io(e.to_string())
    }
}
