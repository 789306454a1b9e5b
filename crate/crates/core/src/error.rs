use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    /// The bracket handed to the root finder does not enclose a sign change.
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: String, hi: String },

    #[error("index {index} out of range {min}..={max}")]
    OutOfRange { index: usize, min: usize, max: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("depth error: {0}")]
    Depth(String),

    /// `f_{n-1}(1 + x^2) < 1` at the given nesting level; signals lost precision.
    #[error("negative radicand at nesting level {0}")]
    NegativeRadicand(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("corpus error: {0}")]
    Corpus(String),
}

impl Error {
    /// Short machine-friendly name, used by the CLI on standard error.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Parse(_) => "ParseError",
            Error::Domain(_) => "DomainError",
            Error::NoConvergence(_) => "NoConvergence",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::Overflow(_) => "Overflow",
            Error::Depth(_) => "DepthError",
            Error::NegativeRadicand(_) => "NegativeRadicand",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Corpus(_) => "CorpusError",
        }
    }

    /// The message without the kind prefix.
    pub fn detail(&self) -> String {
        match self {
            Error::Parse(m)
            | Error::Domain(m)
            | Error::NoConvergence(m)
            | Error::Overflow(m)
            | Error::Depth(m)
            | Error::InvalidConfig(m)
            | Error::Corpus(m) => m.clone(),
            other => other.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
