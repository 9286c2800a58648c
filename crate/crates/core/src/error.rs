use crate::copula::CopulaFamily;
use core::fmt;

/// Errors surfaced by estimators, samplers, and fit procedures.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the operation's domain.
    Domain { op: &'static str, detail: &'static str },
    /// A dependence parameter violated its family's admissible range.
    BadParam { family: CopulaFamily, alpha: f64 },
    /// A Kendall tau value is not admissible for the requested family.
    BadTau { family: CopulaFamily, tau: f64 },
    /// An operation requires a nonempty sample.
    EmptySample,
    /// An operation requires complete (uncensored) data.
    CensoredInput(&'static str),
    /// An operation requires a single-censoring scenario.
    ScenarioMismatch(&'static str),
    /// The conditioning point of a Beran evaluation is censored or unobserved.
    ConditioningPointCensored,
    /// A distribution estimate carries no mass.
    ZeroMass(&'static str),
    /// A curve is degenerate for the requested operation.
    Degenerate(&'static str),
    /// An iterative solver failed to converge; carries the bracket searched
    /// and the best iterate found.
    NoConvergence { op: &'static str, lo: f64, hi: f64, best: f64 },
    /// A calibration target cannot be met within the search bracket.
    Unattainable(&'static str),
    /// A simulation or run configuration is inconsistent.
    BadConfig(&'static str),
    /// Too many bootstrap replicates failed; carries failed and total counts.
    TooManyFailures { failed: usize, total: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { op, detail } => write!(f, "{op}: domain error: {detail}"),
            Error::BadParam { family, alpha } => {
                write!(f, "alpha={alpha} is not admissible for the {family} family")
            }
            Error::BadTau { family, tau } => {
                write!(f, "tau={tau} is not admissible for the {family} family")
            }
            Error::EmptySample => write!(f, "sample is empty"),
            Error::CensoredInput(op) => write!(f, "{op}: requires complete (uncensored) data"),
            Error::ScenarioMismatch(op) => {
                write!(f, "{op}: censoring scenario does not match the estimator")
            }
            Error::ConditioningPointCensored => {
                write!(f, "conditioning point is not an uncensored observed value")
            }
            Error::ZeroMass(op) => write!(f, "{op}: distribution estimate has zero total mass"),
            Error::Degenerate(what) => write!(f, "degenerate input: {what}"),
            Error::NoConvergence { op, lo, hi, best } => write!(
                f,
                "{op}: no convergence on bracket [{lo}, {hi}], best iterate {best}"
            ),
            Error::Unattainable(what) => write!(f, "unattainable target: {what}"),
            Error::BadConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::TooManyFailures { failed, total } => {
                write!(f, "{failed} of {total} replicates failed (more than 10%)")
            }
        }
    }
}

impl core::error::Error for Error {}
