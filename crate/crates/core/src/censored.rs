//! Censored bivariate data model and the simulation engine.
//!
//! An observation records `(y1, y2, delta1, delta2)` where `y_i = min(t_i,
//! x_i, omega_i)` is the value after random censoring by `x_i` and the
//! deterministic limit `omega_i`, and `delta_i` indicates whether the latent
//! variable of interest attained the minimum. Ties between the latent value
//! and a censor are resolved as uncensored (`delta = 1`), matching the
//! indicator definition.

use crate::copula::DependenceParam;
use crate::fm;
use crate::numeric::normal_quantile;
use crate::rng::RngStream;
use crate::{Error, Result};
use alloc::vec::Vec;
use core::fmt;

/// Identifies one of the two margins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Margin {
    First,
    Second,
}

impl Margin {
    pub fn index(&self) -> usize {
        match self {
            Margin::First => 0,
            Margin::Second => 1,
        }
    }

    pub fn other(&self) -> Margin {
        match self {
            Margin::First => Margin::Second,
            Margin::Second => Margin::First,
        }
    }
}

impl fmt::Display for Margin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Margin::First => f.write_str("1"),
            Margin::Second => f.write_str("2"),
        }
    }
}

/// One censored bivariate record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub y1: f64,
    pub y2: f64,
    pub delta1: bool,
    pub delta2: bool,
}

impl Observation {
    pub fn new(y1: f64, y2: f64, delta1: bool, delta2: bool) -> Result<Self> {
        if !(y1.is_finite() && y2.is_finite() && y1 >= 0.0 && y2 >= 0.0) {
            return Err(Error::Domain {
                op: "Observation::new",
                detail: "values must be finite and nonnegative",
            });
        }
        Ok(Observation { y1, y2, delta1, delta2 })
    }

    pub fn value(&self, margin: Margin) -> f64 {
        match margin {
            Margin::First => self.y1,
            Margin::Second => self.y2,
        }
    }

    pub fn delta(&self, margin: Margin) -> bool {
        match margin {
            Margin::First => self.delta1,
            Margin::Second => self.delta2,
        }
    }
}

/// Which margins the sampling design allows to be censored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioHint {
    Complete,
    /// The named margin is subject to censoring; the other is fully observed.
    SingleCensored(Margin),
    DoubleCensored,
}

impl fmt::Display for ScenarioHint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioHint::Complete => f.write_str("complete"),
            ScenarioHint::SingleCensored(m) => write!(f, "single_censored_margin{m}"),
            ScenarioHint::DoubleCensored => f.write_str("double_censored"),
        }
    }
}

/// An ordered collection of observations with its censoring scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    observations: Vec<Observation>,
    hint: ScenarioHint,
}

impl Sample {
    /// Builds a sample, validating the hint against the delta columns:
    /// `Complete` requires all deltas set, and single censoring on margin `j`
    /// requires the other margin fully observed.
    pub fn new(observations: Vec<Observation>, hint: ScenarioHint) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        let ok = match hint {
            ScenarioHint::Complete => observations.iter().all(|o| o.delta1 && o.delta2),
            ScenarioHint::SingleCensored(m) => {
                observations.iter().all(|o| o.delta(m.other()))
            }
            ScenarioHint::DoubleCensored => true,
        };
        if !ok {
            return Err(Error::BadConfig("scenario hint inconsistent with delta columns"));
        }
        Ok(Sample { observations, hint })
    }

    /// Builds a sample, inferring the scenario from the delta columns.
    pub fn infer(observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        let all1 = observations.iter().all(|o| o.delta1);
        let all2 = observations.iter().all(|o| o.delta2);
        let hint = match (all1, all2) {
            (true, true) => ScenarioHint::Complete,
            (false, true) => ScenarioHint::SingleCensored(Margin::First),
            (true, false) => ScenarioHint::SingleCensored(Margin::Second),
            (false, false) => ScenarioHint::DoubleCensored,
        };
        Sample::new(observations, hint)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn hint(&self) -> ScenarioHint {
        self.hint
    }

    pub fn is_complete(&self) -> bool {
        self.observations.iter().all(|o| o.delta1 && o.delta2)
    }

    /// Fraction of observations with at least one censored component.
    pub fn censored_fraction(&self) -> f64 {
        let c = self.observations.iter().filter(|o| !o.delta1 || !o.delta2).count();
        c as f64 / self.observations.len() as f64
    }

    /// Fraction of observations censored on the given margin.
    pub fn censored_fraction_margin(&self, margin: Margin) -> f64 {
        let c = self.observations.iter().filter(|o| !o.delta(margin)).count();
        c as f64 / self.observations.len() as f64
    }
}

/// Parametric marginal models used for simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MarginalModel {
    UnitExponential,
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
}

impl MarginalModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            MarginalModel::UnitExponential => true,
            MarginalModel::Exponential { rate } => rate.is_finite() && *rate > 0.0,
            MarginalModel::LogNormal { mu, sigma } => {
                mu.is_finite() && sigma.is_finite() && *sigma > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::BadConfig("marginal model parameters out of range"))
        }
    }

    /// Quantile function (inverse CDF) at `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match self {
            MarginalModel::UnitExponential => -fm::ln_1p(-u),
            MarginalModel::Exponential { rate } => -fm::ln_1p(-u) / rate,
            MarginalModel::LogNormal { mu, sigma } => fm::exp(mu + sigma * normal_quantile(u)),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            MarginalModel::UnitExponential => -fm::exp_m1(-x),
            MarginalModel::Exponential { rate } => -fm::exp_m1(-rate * x),
            MarginalModel::LogNormal { mu, sigma } => {
                crate::numeric::normal_cdf((fm::ln(x) - mu) / sigma)
            }
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    pub fn draw(&self, rng: &mut RngStream) -> f64 {
        self.quantile(rng.uniform())
    }
}

/// Full description of one simulated censoring design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub copula: DependenceParam,
    pub margin1: MarginalModel,
    pub margin2: MarginalModel,
    pub censor1: Option<MarginalModel>,
    pub censor2: Option<MarginalModel>,
    /// When set, a single censoring draw applies to both margins (X1 = X2).
    pub shared_censor: bool,
    pub limit1: f64,
    pub limit2: f64,
    pub n: usize,
    pub seed: u64,
}

impl SimulationConfig {
    /// A complete-data design: no censors, infinite limits.
    pub fn complete(copula: DependenceParam, margin1: MarginalModel, margin2: MarginalModel, n: usize, seed: u64) -> Self {
        SimulationConfig {
            copula,
            margin1,
            margin2,
            censor1: None,
            censor2: None,
            shared_censor: false,
            limit1: f64::INFINITY,
            limit2: f64::INFINITY,
            n,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::BadConfig("n must be at least 1"));
        }
        if !(self.limit1 > 0.0) || !(self.limit2 > 0.0) {
            return Err(Error::BadConfig("limits must be strictly positive"));
        }
        self.margin1.validate()?;
        self.margin2.validate()?;
        if let Some(c) = &self.censor1 {
            c.validate()?;
        }
        if let Some(c) = &self.censor2 {
            c.validate()?;
        }
        if self.shared_censor {
            match (&self.censor1, &self.censor2) {
                (Some(a), Some(b)) if a == b => {}
                (Some(_), None) => {}
                _ => {
                    return Err(Error::BadConfig(
                        "shared_censor requires censor1 set and censor2 absent or equal",
                    ))
                }
            }
        }
        Ok(())
    }

    fn scenario_hint(&self) -> ScenarioHint {
        let touch1 = self.censor1.is_some() || self.limit1.is_finite();
        let touch2 = self.censor2.is_some() || self.shared_censor || self.limit2.is_finite();
        match (touch1, touch2) {
            (false, false) => ScenarioHint::Complete,
            (true, false) => ScenarioHint::SingleCensored(Margin::First),
            (false, true) => ScenarioHint::SingleCensored(Margin::Second),
            (true, true) => ScenarioHint::DoubleCensored,
        }
    }
}

/// Draws a censored sample: `(t1, t2)` from the copula with the configured
/// margins, censoring variables independent of the latent pair (one shared
/// draw when `shared_censor` is set), and deterministic limits. `y_i =
/// min(t_i, x_i, omega_i)` with `delta_i = [t_i <= min(x_i, omega_i)]`.
///
/// Streams: copula pairs draw from substream 0 of the seed, censors from
/// substream 1, so the latent sample is invariant to the censoring design.
pub fn simulate_censored(config: &SimulationConfig) -> Result<Sample> {
    config.validate()?;
    let mut pair_rng = RngStream::substream(config.seed, 0);
    let mut censor_rng = RngStream::substream(config.seed, 1);
    let mut observations = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let (u1, u2) = config.copula.sample_pair(&mut pair_rng);
        let t1 = config.margin1.quantile(u1);
        let t2 = config.margin2.quantile(u2);
        let (x1, x2) = if config.shared_censor {
            let x = config.censor1.as_ref().expect("validated").draw(&mut censor_rng);
            (x, x)
        } else {
            let x1 = config.censor1.as_ref().map(|c| c.draw(&mut censor_rng)).unwrap_or(f64::INFINITY);
            let x2 = config.censor2.as_ref().map(|c| c.draw(&mut censor_rng)).unwrap_or(f64::INFINITY);
            (x1, x2)
        };
        let cap1 = x1.min(config.limit1);
        let cap2 = x2.min(config.limit2);
        let (y1, delta1) = if t1 <= cap1 { (t1, true) } else { (cap1, false) };
        let (y2, delta2) = if t2 <= cap2 { (t2, true) } else { (cap2, false) };
        observations.push(Observation { y1, y2, delta1, delta2 });
    }
    Sample::new(observations, config.scenario_hint())
}

/// Which censoring design a calibration targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensoringScenario {
    /// Censor only the named margin; target is that margin's censored fraction.
    Single(Margin),
    /// Independent censors on both margins with a common parameter; target is
    /// the probability of at least one censored component.
    Double,
    /// One shared censor X1 = X2; target is the probability of at least one
    /// censored component.
    Shared,
}

/// Shape of the censoring distribution being calibrated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CensorShape {
    /// Exponential; the calibrated knob is the rate.
    Exponential,
    /// Log-normal with fixed sigma; the calibrated knob is mu.
    LogNormal { sigma: f64 },
}

/// Result of a censoring calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibratedCensoring {
    pub censor1: Option<MarginalModel>,
    pub censor2: Option<MarginalModel>,
    pub shared: bool,
    /// Pilot-sample censored fraction achieved at the calibrated parameter.
    pub achieved: f64,
}

impl CalibratedCensoring {
    /// Applies the calibrated censoring to a simulation config skeleton.
    pub fn apply(&self, config: &mut SimulationConfig) {
        config.censor1 = self.censor1;
        config.censor2 = self.censor2;
        config.shared_censor = self.shared;
    }
}

/// Calibrates censoring parameters so the Monte Carlo estimate of the target
/// censored fraction over a pilot sample lands within ±1% of `target`.
///
/// The pilot latent sample and the censor noise are drawn once and reused
/// across candidate parameters, making the pilot fraction monotone in the
/// knob and the bisection deterministic.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_censoring(
    copula: DependenceParam,
    margin1: MarginalModel,
    margin2: MarginalModel,
    target: f64,
    scenario: CensoringScenario,
    shape: CensorShape,
    pilot_n: usize,
    seed: u64,
) -> Result<CalibratedCensoring> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Domain {
            op: "calibrate_censoring",
            detail: "target fraction must lie in (0, 1)",
        });
    }
    margin1.validate()?;
    margin2.validate()?;
    let pilot_n = pilot_n.max(1000);

    let mut pair_rng = RngStream::substream(seed, 0);
    let mut noise_rng = RngStream::substream(seed, 1);
    let mut t1 = Vec::with_capacity(pilot_n);
    let mut t2 = Vec::with_capacity(pilot_n);
    let mut z1 = Vec::with_capacity(pilot_n);
    let mut z2 = Vec::with_capacity(pilot_n);
    for _ in 0..pilot_n {
        let (u1, u2) = copula.sample_pair(&mut pair_rng);
        t1.push(margin1.quantile(u1));
        t2.push(margin2.quantile(u2));
        // Standardized censor noise, transformed per candidate parameter.
        z1.push(noise_rng.uniform());
        z2.push(noise_rng.uniform());
    }

    // Maps the calibration knob to censor draws: exponential uses X = E/rate
    // with E = -ln(1-z); log-normal uses X = exp(mu + sigma*Phi^-1(z)).
    let censor_value = |shape: CensorShape, knob: f64, z: f64| -> f64 {
        match shape {
            CensorShape::Exponential => -fm::ln_1p(-z) / fm::exp(knob),
            CensorShape::LogNormal { sigma } => fm::exp(knob + sigma * normal_quantile(z)),
        }
    };

    let fraction = |knob: f64| -> f64 {
        let mut censored = 0usize;
        for i in 0..pilot_n {
            let hit = match scenario {
                CensoringScenario::Single(Margin::First) => {
                    censor_value(shape, knob, z1[i]) < t1[i]
                }
                CensoringScenario::Single(Margin::Second) => {
                    censor_value(shape, knob, z1[i]) < t2[i]
                }
                CensoringScenario::Double => {
                    censor_value(shape, knob, z1[i]) < t1[i]
                        || censor_value(shape, knob, z2[i]) < t2[i]
                }
                CensoringScenario::Shared => {
                    let x = censor_value(shape, knob, z1[i]);
                    x < t1[i] || x < t2[i]
                }
            };
            if hit {
                censored += 1;
            }
        }
        censored as f64 / pilot_n as f64
    };

    // The knob is log-rate (exponential) or mu (log-normal); the censored
    // fraction is monotone in it (increasing for rate, decreasing for mu).
    let (lo, hi, increasing) = match shape {
        CensorShape::Exponential => (-25.0, 25.0, true),
        CensorShape::LogNormal { .. } => (-60.0, 60.0, false),
    };
    let f = |knob: f64| {
        let fr = fraction(knob);
        if increasing {
            fr - target
        } else {
            target - fr
        }
    };
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::Unattainable("target censored fraction outside the search bracket"));
    }
    let knob = crate::numeric::bisect_root("calibrate_censoring", &f, lo, hi, 1e-12, 0.0)?;
    let achieved = fraction(knob);
    if fm::abs(achieved - target) > 0.01 {
        return Err(Error::Unattainable("pilot fraction not within 1% of target"));
    }

    let model = match shape {
        CensorShape::Exponential => MarginalModel::Exponential { rate: fm::exp(knob) },
        CensorShape::LogNormal { sigma } => MarginalModel::LogNormal { mu: knob, sigma },
    };
    let calibrated = match scenario {
        CensoringScenario::Single(Margin::First) => CalibratedCensoring {
            censor1: Some(model),
            censor2: None,
            shared: false,
            achieved,
        },
        CensoringScenario::Single(Margin::Second) => CalibratedCensoring {
            censor1: None,
            censor2: Some(model),
            shared: false,
            achieved,
        },
        CensoringScenario::Double => CalibratedCensoring {
            censor1: Some(model),
            censor2: Some(model),
            shared: false,
            achieved,
        },
        CensoringScenario::Shared => CalibratedCensoring {
            censor1: Some(model),
            censor2: None,
            shared: true,
            achieved,
        },
    };
    Ok(calibrated)
}

/// The three censoring-level presets used by the limit study, expressed as
/// targets for the probability of at least one censored component.
pub const CENSORING_PRESETS: [f64; 3] = [0.05, 0.30, 0.75];
