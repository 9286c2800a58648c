//! IO, file formats, study harnesses, and the command-line front end for the
//! copula selection library in `copfit-core`.

pub mod io;
pub mod report;
pub mod scenario;
pub mod studies;
pub mod svg;

use std::fmt;

/// Errors surfaced by the CLI layer, classed for exit codes: input problems
/// exit with 2, numerical failures with 3.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("scenario error: {0}")]
    Scenario(String),
    #[error("invalid argument: {0}")]
    Arg(String),
    #[error("{0}")]
    Core(#[from] copfit_core::Error),
}

/// Machine-readable error class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Numerical,
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorClass::Input => f.write_str("input"),
            ErrorClass::Numerical => f.write_str("numerical"),
        }
    }
}

impl CliError {
    pub fn class(&self) -> ErrorClass {
        use copfit_core::Error as E;
        match self {
            CliError::Io(_) | CliError::Csv { .. } | CliError::Scenario(_) | CliError::Arg(_) => {
                ErrorClass::Input
            }
            CliError::Core(e) => match e {
                E::Domain { .. }
                | E::BadParam { .. }
                | E::BadTau { .. }
                | E::EmptySample
                | E::CensoredInput(_)
                | E::ScenarioMismatch(_)
                | E::ConditioningPointCensored
                | E::BadConfig(_) => ErrorClass::Input,
                E::ZeroMass(_)
                | E::Degenerate(_)
                | E::NoConvergence { .. }
                | E::Unattainable(_)
                | E::TooManyFailures { .. } => ErrorClass::Numerical,
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            ErrorClass::Input => 2,
            ErrorClass::Numerical => 3,
        }
    }

    /// The error JSON emitted on stdout for machine consumption.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": {
                "class": self.class().to_string(),
                "message": self.to_string(),
            }
        })
        .to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
