use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor received a value that violates the type's invariant.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("wealth {wealth} is outside the domain of the utility function")]
    Domain { wealth: f64 },

    /// Some outcome with positive probability leaves wealth at or below zero,
    /// so the time-average growth rate is negative infinity.
    #[error("outcome {delta} bankrupts wealth {wealth} (probability {probability})")]
    Bankruptcy { wealth: f64, delta: f64, probability: f64 },

    #[error("rates in {left} and {right} cannot be combined")]
    UnitMismatch { left: &'static str, right: &'static str },

    #[error("no sign change in bracket [{lower}, {upper}]")]
    NoRootInBracket { lower: f64, upper: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("validation failed for `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// Machine-readable category used by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation { .. } | Error::InvalidParameter { .. } => "validation",
            Error::Domain { .. } | Error::Bankruptcy { .. } | Error::UnitMismatch { .. } => "domain",
            Error::NoRootInBracket { .. } | Error::DegenerateFit(_) => "solver",
        }
    }

    /// Process exit status for this error: 2 parse/validation, 3 domain, 4 solver.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "parse" | "validation" => 2,
            "domain" => 3,
            _ => 4,
        }
    }
}
