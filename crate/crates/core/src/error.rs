use thiserror::Error;

/// A single failed parameter condition, reported by
/// [`validate_proposition_conditions`](crate::params::validate_proposition_conditions).
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub parameter: String,
    pub reason: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.parameter, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma function pole at {0}")]
    GammaPole(String),

    #[error("parameter conditions violated: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("argument {0} lies on the branch cut [1, inf)")]
    BranchCut(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::GammaPole(_) | Error::Validation(_) | Error::Domain(_) | Error::BranchCut(_) => 2,
            Error::NonConvergence(_) => 3,
            Error::Io(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
