//! Archimedean copula selection for bivariate data under flexible right-censoring.
//!
//! The crate estimates the Kendall distribution of a censored bivariate sample
//! nonparametrically, recovers the Archimedean generator from it, and validates
//! candidate copula families (Clayton, Frank, Gumbel, Joe, plus independence)
//! with three procedures: an omnibus pseudo-likelihood comparison, an L²-norm
//! distance with bootstrap pseudo p-values, and a multiple-imputation
//! goodness-of-fit test.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats, and the command
//! line front end live in the companion `copfit` crate.
//!
//! Modules follow the estimation pipeline:
//!
//! * [`copula`] — closed-form machinery for the copula families: generators,
//!   λ and Kendall functions, CDF/density/partials, τ↔α maps, exact samplers.
//! * [`censored`] — the censored-observation data model and the simulation
//!   engine (censoring variables, deterministic limits, calibration).
//! * [`survival`] — Kaplan–Meier marginals, the Beran conditional estimator,
//!   and the joint distribution estimators used under censoring.
//! * [`kendall`] — empirical Kendall distribution, λ̂ and τ̂, and the
//!   nonparametric generator estimate.
//! * [`selection`] — the three validation procedures and the fit report types.

#![no_std]
#![deny(unsafe_code)]
// Guards written as `!(x > 0.0)` instead of `x <= 0.0` are deliberate: the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod censored;
pub mod copula;
mod error;
pub mod kendall;
pub mod numeric;
pub mod rng;
pub mod selection;
pub mod survival;

pub use censored::{
    calibrate_censoring, simulate_censored, CalibratedCensoring, CensorShape, CensoringScenario,
    Margin, MarginalModel, Observation, Sample, ScenarioHint, SimulationConfig,
    CENSORING_PRESETS,
};
pub use copula::{CopulaFamily, DependenceParam, KendallTau};
pub use error::Error;
pub use kendall::{
    estimate_curve, generator_estimate, graphical_curves, kendall_counting, kendall_from_joint,
    kendall_from_joint_with, CurveSource, EstimatorChoice, GeneratorEstimate, KendallCurve,
    MassConvention, PipelineOptions,
};
pub use rng::RngStream;
pub use selection::{
    bootstrap_pseudo_p, l2_distance, omnibus_table, pseudo_mle, select, wang_gof, CombineRule,
    FitResult, GofResult, ImputedPair, SelectionReport,
};
pub use survival::{JointDistributionEstimate, KernelShape, KernelSpec, StepFunction};

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Floating-point math shims: `no_std` builds have no `f64::exp`/`ln`/...,
/// so everything transcendental routes through `libm`.
pub(crate) mod fm {
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline]
    pub fn exp_m1(x: f64) -> f64 {
        libm::expm1(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn ln_1p(x: f64) -> f64 {
        libm::log1p(x)
    }
    #[inline]
    pub fn powf(x: f64, y: f64) -> f64 {
        libm::pow(x, y)
    }
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    #[inline]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    #[inline]
    pub fn floor(x: f64) -> f64 {
        libm::floor(x)
    }
    #[inline]
    pub fn erfc(x: f64) -> f64 {
        libm::erfc(x)
    }
    #[inline]
    pub fn lgamma(x: f64) -> f64 {
        libm::lgamma(x)
    }
    #[inline]
    pub fn atanh(x: f64) -> f64 {
        libm::atanh(x)
    }
}
