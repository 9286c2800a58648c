//! Declarative simulation scenario files: `key = value` lines with `#`
//! comments.
//!
//! ```text
//! copula = clayton          # clayton | frank | gumbel | joe | independence
//! tau = 0.4                 # or: alpha = 1.3332
//! margin1 = unit_exponential
//! margin2 = exponential:0.5 # exponential:RATE | lognormal:MU:SIGMA
//! censoring = double        # none | single1 | single2 | double | shared
//! censor_target = 0.2       # calibrated; or censor1/censor2 = exponential:RATE
//! limit1 = inf
//! limit2 = inf
//! n = 1000
//! replicates = 1
//! seed = 42
//! ```

use crate::{CliError, CliResult};
use copfit_core::{
    calibrate_censoring, CensorShape, CensoringScenario, CopulaFamily, DependenceParam,
    KendallTau, Margin, MarginalModel, SimulationConfig,
};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensoringKind {
    None,
    Single1,
    Single2,
    Double,
    Shared,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub copula: DependenceParam,
    pub margin1: MarginalModel,
    pub margin2: MarginalModel,
    pub censoring: CensoringKind,
    pub censor_target: Option<f64>,
    pub censor1: Option<MarginalModel>,
    pub censor2: Option<MarginalModel>,
    pub limit1: f64,
    pub limit2: f64,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> CliResult<Scenario> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Scenario(format!("line {}: expected `key = value`", idx + 1))
        })?;
        map.insert(key.trim().to_ascii_lowercase(), value.trim().to_string());
    }
    let err = |m: String| CliError::Scenario(m);

    let family_name = map
        .get("copula")
        .ok_or_else(|| err("missing `copula`".into()))?;
    let family = CopulaFamily::parse(family_name)
        .ok_or_else(|| err(format!("unknown copula `{family_name}`")))?;
    let copula = match (map.get("alpha"), map.get("tau")) {
        (Some(a), _) => {
            let alpha: f64 = a.parse().map_err(|_| err(format!("bad alpha `{a}`")))?;
            DependenceParam::new(family, alpha)?
        }
        (None, Some(t)) => {
            let tau: f64 = t.parse().map_err(|_| err(format!("bad tau `{t}`")))?;
            DependenceParam::from_tau(family, KendallTau::new(tau)?)?
        }
        (None, None) if family == CopulaFamily::Independence => DependenceParam::independence(),
        _ => return Err(err("provide `tau` or `alpha`".into())),
    };

    let margin = |key: &str| -> CliResult<MarginalModel> {
        let raw = map
            .get(key)
            .map(String::as_str)
            .unwrap_or("unit_exponential");
        parse_marginal(raw).ok_or_else(|| err(format!("bad marginal `{raw}` for `{key}`")))
    };
    let margin1 = margin("margin1")?;
    let margin2 = margin("margin2")?;

    let censoring = match map.get("censoring").map(String::as_str).unwrap_or("none") {
        "none" => CensoringKind::None,
        "single1" => CensoringKind::Single1,
        "single2" => CensoringKind::Single2,
        "double" => CensoringKind::Double,
        "shared" => CensoringKind::Shared,
        other => return Err(err(format!("unknown censoring `{other}`"))),
    };
    let censor_target = match map.get("censor_target") {
        Some(t) => Some(t.parse::<f64>().map_err(|_| err(format!("bad censor_target `{t}`")))?),
        None => None,
    };
    let censor = |key: &str| -> CliResult<Option<MarginalModel>> {
        match map.get(key) {
            None => Ok(None),
            Some(raw) => parse_marginal(raw)
                .map(Some)
                .ok_or_else(|| err(format!("bad censor model `{raw}`"))),
        }
    };
    let parse_limit = |key: &str| -> CliResult<f64> {
        match map.get(key).map(String::as_str) {
            None | Some("inf") | Some("infinity") => Ok(f64::INFINITY),
            Some(raw) => raw
                .parse::<f64>()
                .map_err(|_| err(format!("bad limit `{raw}`"))),
        }
    };

    let parse_usize = |key: &str, default: usize| -> CliResult<usize> {
        match map.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| err(format!("bad `{key}`: `{raw}`"))),
        }
    };
    let seed = match map.get("seed") {
        None => return Err(err("missing `seed` (stochastic scenarios need one)".into())),
        Some(raw) => raw.parse().map_err(|_| err(format!("bad seed `{raw}`")))?,
    };

    Ok(Scenario {
        copula,
        margin1,
        margin2,
        censoring,
        censor_target,
        censor1: censor("censor1")?,
        censor2: censor("censor2")?,
        limit1: parse_limit("limit1")?,
        limit2: parse_limit("limit2")?,
        n: parse_usize("n", 1000)?,
        replicates: parse_usize("replicates", 1)?,
        seed,
    })
}

fn parse_marginal(raw: &str) -> Option<MarginalModel> {
    let mut parts = raw.split(':');
    match parts.next()? {
        "unit_exponential" => Some(MarginalModel::UnitExponential),
        "exponential" => {
            let rate: f64 = parts.next()?.parse().ok()?;
            Some(MarginalModel::Exponential { rate })
        }
        "lognormal" => {
            let mu: f64 = parts.next()?.parse().ok()?;
            let sigma: f64 = parts.next()?.parse().ok()?;
            Some(MarginalModel::LogNormal { mu, sigma })
        }
        _ => None,
    }
}

impl Scenario {
    /// Resolves the censoring models: explicit `censor1`/`censor2` take
    /// precedence; otherwise `censor_target` calibrates exponential censors
    /// against the scenario's latent law.
    pub fn resolve_censoring(
        &self,
    ) -> CliResult<(Option<MarginalModel>, Option<MarginalModel>, bool)> {
        if self.censoring == CensoringKind::None {
            return Ok((None, None, false));
        }
        if self.censor1.is_some() || self.censor2.is_some() {
            let shared = self.censoring == CensoringKind::Shared;
            return Ok((self.censor1, self.censor2, shared));
        }
        let target = self.censor_target.unwrap_or(0.2);
        let scenario = match self.censoring {
            CensoringKind::Single1 => CensoringScenario::Single(Margin::First),
            CensoringKind::Single2 => CensoringScenario::Single(Margin::Second),
            CensoringKind::Double => CensoringScenario::Double,
            CensoringKind::Shared => CensoringScenario::Shared,
            CensoringKind::None => unreachable!(),
        };
        let cal = calibrate_censoring(
            self.copula,
            self.margin1,
            self.margin2,
            target,
            scenario,
            CensorShape::Exponential,
            50_000,
            self.seed ^ 0xCA1B,
        )?;
        Ok((cal.censor1, cal.censor2, cal.shared))
    }

    /// The simulation config for replicate `r`, with the censoring models
    /// already resolved (pass the output of [`Self::resolve_censoring`]).
    pub fn config_for_replicate(
        &self,
        censors: &(Option<MarginalModel>, Option<MarginalModel>, bool),
        replicate: u64,
    ) -> SimulationConfig {
        SimulationConfig {
            copula: self.copula,
            margin1: self.margin1,
            margin2: self.margin2,
            censor1: censors.0,
            censor2: censors.1,
            shared_censor: censors.2,
            limit1: self.limit1,
            limit2: self.limit2,
            n: self.n,
            seed: copfit_core::rng::mix_seed(self.seed, 0x5ce9, replicate),
        }
    }
}
