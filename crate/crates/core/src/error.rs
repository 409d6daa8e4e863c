use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A Choquet-type integral is infinite.
    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A documented precondition of a theorem-based test is not met.
    #[error("precondition not met: {0}")]
    Precondition(String),

    /// A VaR ratio whose denominator is zero. The numerator is kept so that
    /// superadditivity at zero marginal VaRs remains visible.
    #[error("zero denominator in VaR ratio (numerator = {numerator})")]
    ZeroDenominator { numerator: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, column: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: msg.into(),
        }
    }

    /// Process exit status used by the command-line tool: 1 for parse and
    /// I/O errors, 3 for divergence, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io(_) => 1,
            Error::Divergence(_) => 3,
            _ => 2,
        }
    }

    /// Whether this error belongs to the domain-error class (bad arguments,
    /// violated preconditions, degenerate ratios).
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Precondition(_)
                | Error::ZeroDenominator { .. }
                | Error::Unsupported(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
