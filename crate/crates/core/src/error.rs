use std::fmt;

use thiserror::Error;

/// A single problem found while validating an experiment configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigViolation {
    pub key: String,
    pub reason: String,
}

impl ConfigViolation {
    pub fn new(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.reason)
    }
}

fn join_violations(v: &[ConfigViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is not strictly inside the domain: {0}")]
    DomainViolation(String),

    #[error("numerical overflow: {0}")]
    NumericalOverflow(String),

    #[error("degenerate particle cloud: all pairwise distances are zero")]
    DegenerateCloud,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {}", join_violations(.0))]
    Config(Vec<ConfigViolation>),

    #[error("numeric failure at iteration {iteration}: {reason}")]
    NumericFailure { iteration: usize, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed data file: {0}")]
    Parse(String),
}

impl Error {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config(vec![ConfigViolation::new(key, reason)])
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericFailure { .. } | Error::NumericalOverflow(_) | Error::DegenerateCloud => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
