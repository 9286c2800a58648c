//! The three validation procedures: omnibus pseudo-likelihood estimation,
//! L²-norm distance with bootstrap pseudo p-values, and the
//! multiple-imputation goodness-of-fit test for censored dependent data.

use crate::censored::{
    simulate_censored, Margin, MarginalModel, Sample, ScenarioHint, SimulationConfig,
};
use crate::copula::{CopulaFamily, DependenceParam};
use crate::fm;
use crate::kendall::{estimate_curve, KendallCurve, PipelineOptions};
use crate::numeric::{golden_max, normal_cdf};
use crate::rng::{mix_seed, RngStream};
use crate::survival::{kaplan_meier, StepFunction};
use crate::{Error, Result};
use alloc::string::String;
use alloc::vec::Vec;

/// Per-candidate fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub family: CopulaFamily,
    /// Parameter recovered from τ̂ inversion.
    pub alpha_hat: f64,
    /// True when τ̂ fell outside the family's admissible range and was
    /// clamped to the boundary before inversion.
    pub alpha_hat_clamped: bool,
    /// Pseudo-maximum-likelihood parameter.
    pub alpha_star: f64,
    /// |alpha_hat - alpha_star|, the omnibus criterion.
    pub omnibus_gap: f64,
    /// Riemann L²-norm distance between K̂ and the fitted family curve.
    pub l2_distance: f64,
    pub pseudo_p: Option<f64>,
    pub gof_p: Option<f64>,
}

/// Outcome of a full selection run.
#[derive(Debug, Clone)]
pub struct SelectionReport {
    pub tau_hat: f64,
    pub n: usize,
    pub scenario: ScenarioHint,
    pub results: Vec<FitResult>,
    pub winner_omnibus: Option<CopulaFamily>,
    pub winner_l2: Option<CopulaFamily>,
    pub winner_pseudo_p: Option<CopulaFamily>,
    pub winner_gof: Option<CopulaFamily>,
    pub dropped_bootstrap: usize,
    pub notes: Vec<String>,
}

/// Pseudo-MLE fit output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoMle {
    pub alpha: f64,
    pub log_likelihood: f64,
}

/// Pseudo-observations from a rescaled Kaplan–Meier margin, clamped inside
/// the open unit interval at `[1/(n+1), n/(n+1)]`.
fn pseudo_observations(sample: &Sample, margin: Margin, km: &StepFunction) -> Vec<f64> {
    let n = sample.len() as f64;
    let lo = 1.0 / (n + 1.0);
    let hi = n / (n + 1.0);
    sample
        .observations()
        .iter()
        .map(|o| km.eval(o.value(margin)).clamp(lo, hi))
        .collect()
}

/// Per-observation censored-copula log likelihood: exactly one of the four
/// case factors is active for every observation. A censored component is
/// known to EXCEED its pseudo-observation (right censoring on the
/// probability-transform scale), so the partial-censoring factors are the
/// upper-orthant derivatives `1 - ∂C/∂u` and the doubly-censored factor is
/// the joint upper-orthant probability `1 - u1 - u2 + C`.
fn case_log_likelihood(param: &DependenceParam, sample: &Sample, u1: &[f64], u2: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, o) in sample.observations().iter().enumerate() {
        let term = match (o.delta1, o.delta2) {
            (true, true) => param.log_density_unchecked(u1[i], u2[i]),
            (true, false) => fm::ln_1p(-param.partial_u1_unchecked(u1[i], u2[i])),
            (false, true) => fm::ln_1p(-param.partial_u1_unchecked(u2[i], u1[i])),
            (false, false) => {
                fm::ln(1.0 - u1[i] - u2[i] + param.cdf_unchecked(u1[i], u2[i]))
            }
        };
        if !term.is_finite() {
            return f64::NEG_INFINITY;
        }
        acc += term;
    }
    acc
}

const OPT_GRID: usize = 41;

/// Maximizes the censored-copula pseudo likelihood over the family's α
/// domain. The margins must be the rescaled Kaplan–Meier estimates; Gumbel,
/// Joe, and Clayton optimize in a log transform of their α domains.
pub fn pseudo_mle(
    sample: &Sample,
    family: CopulaFamily,
    margins: (&StepFunction, &StepFunction),
) -> Result<PseudoMle> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if margins.0.is_degenerate() || margins.1.is_degenerate() {
        return Err(Error::Degenerate("pseudo_mle needs nondegenerate margins"));
    }
    let u1 = pseudo_observations(sample, Margin::First, margins.0);
    let u2 = pseudo_observations(sample, Margin::Second, margins.1);

    if family == CopulaFamily::Independence {
        let param = DependenceParam::independence();
        return Ok(PseudoMle {
            alpha: 0.0,
            log_likelihood: case_log_likelihood(&param, sample, &u1, &u2),
        });
    }

    // θ is the optimizer coordinate; α = to_alpha(θ).
    let (theta_lo, theta_hi, to_alpha): (f64, f64, fn(f64) -> f64) = match family {
        CopulaFamily::Clayton => (fm::ln(1e-6), fm::ln(500.0), |t| fm::exp(t)),
        CopulaFamily::Gumbel | CopulaFamily::Joe => {
            (fm::ln(1e-9), fm::ln(499.0), |t| 1.0 + fm::exp(t))
        }
        CopulaFamily::Frank => (-500.0, 500.0, |t| if t == 0.0 { 1e-9 } else { t }),
        CopulaFamily::Independence => unreachable!(),
    };
    let objective = |theta: f64| -> f64 {
        let alpha = to_alpha(theta);
        match DependenceParam::new(family, alpha) {
            Ok(p) => case_log_likelihood(&p, sample, &u1, &u2),
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let mut best_i = 0;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..OPT_GRID {
        let theta = theta_lo + (theta_hi - theta_lo) * i as f64 / (OPT_GRID - 1) as f64;
        let v = objective(theta);
        if v > best_val {
            best_val = v;
            best_i = i;
        }
    }
    if !best_val.is_finite() {
        return Err(Error::NoConvergence {
            op: "pseudo_mle",
            lo: to_alpha(theta_lo),
            hi: to_alpha(theta_hi),
            best: f64::NAN,
        });
    }
    let step = (theta_hi - theta_lo) / (OPT_GRID - 1) as f64;
    let lo = theta_lo + step * best_i.saturating_sub(1) as f64;
    let hi = (theta_lo + step * (best_i + 1) as f64).min(theta_hi);
    let theta_star = golden_max(&objective, lo, hi, 1e-10);
    let mut alpha = to_alpha(theta_star);
    let mut value = objective(theta_star);

    // Families with an independence boundary compare against it explicitly.
    if matches!(family, CopulaFamily::Gumbel | CopulaFamily::Joe) {
        let boundary = DependenceParam::new(family, 1.0).expect("alpha=1 admissible");
        let v = case_log_likelihood(&boundary, sample, &u1, &u2);
        if v > value {
            alpha = 1.0;
            value = v;
        }
    }
    Ok(PseudoMle { alpha, log_likelihood: value })
}

/// Riemann L²-norm distance between the empirical Kendall curve and the
/// analytic curve of `(family, alpha)`, summed over the ordered ν grid with
/// the integration starting at the smallest grid value.
pub fn l2_distance(curve: &KendallCurve, family: CopulaFamily, alpha: f64) -> Result<f64> {
    let param = if family == CopulaFamily::Independence {
        DependenceParam::independence()
    } else {
        DependenceParam::new(family, alpha)?
    };
    let nu = curve.nu_grid();
    let k = curve.k_values();
    let mut acc = 0.0;
    for i in 1..nu.len() {
        let width = nu[i] - nu[i - 1];
        let diff = k[i] - param.kendall_unchecked(nu[i]);
        acc += diff * diff * width;
    }
    Ok(acc)
}

/// Result of the omnibus comparison over a candidate set.
#[derive(Debug, Clone)]
pub struct OmnibusOutcome {
    pub tau_hat: f64,
    /// Raw τ̂ fell outside [-1, 1] and was clamped (finite-sample artifact).
    pub tau_clamped: bool,
    pub results: Vec<FitResult>,
    pub winner: CopulaFamily,
    /// True when the gap minimum was tied and the L²/lexical tie-break fired.
    pub tie_break: bool,
}

/// Runs the omnibus procedure: τ̂-inverted α̂ against the pseudo-MLE α* per
/// candidate; the winner minimizes |α̂ - α*|, ties broken by smaller L²
/// distance, then lexical family order.
pub fn omnibus_table(
    sample: &Sample,
    candidates: &[CopulaFamily],
    options: &PipelineOptions,
) -> Result<OmnibusOutcome> {
    if candidates.is_empty() {
        return Err(Error::BadConfig("candidate list is empty"));
    }
    let curve = estimate_curve(sample, options)?;
    let tau = curve.tau_hat();
    let km1 = kaplan_meier(sample, Margin::First, true)?;
    let km2 = kaplan_meier(sample, Margin::Second, true)?;
    let mut results = Vec::with_capacity(candidates.len());
    for &family in candidates {
        let (param, clamped) = DependenceParam::from_tau_clamped(family, tau);
        let fit = pseudo_mle(sample, family, (&km1, &km2))?;
        let l2 = l2_distance(&curve, family, param.alpha())?;
        results.push(FitResult {
            family,
            alpha_hat: param.alpha(),
            alpha_hat_clamped: clamped,
            alpha_star: fit.alpha,
            omnibus_gap: fm::abs(param.alpha() - fit.alpha),
            l2_distance: l2,
            pseudo_p: None,
            gof_p: None,
        });
    }
    let (winner, tie_break) = pick_winner(&results);
    Ok(OmnibusOutcome {
        tau_hat: tau,
        tau_clamped: curve.tau_clamped(),
        results,
        winner,
        tie_break,
    })
}

fn pick_winner(results: &[FitResult]) -> (CopulaFamily, bool) {
    let mut best = &results[0];
    let mut tie = false;
    for r in &results[1..] {
        let by_gap = r.omnibus_gap.partial_cmp(&best.omnibus_gap).unwrap();
        match by_gap {
            core::cmp::Ordering::Less => {
                best = r;
            }
            core::cmp::Ordering::Equal => {
                tie = true;
                let by_l2 = r.l2_distance.partial_cmp(&best.l2_distance).unwrap();
                if by_l2 == core::cmp::Ordering::Less
                    || (by_l2 == core::cmp::Ordering::Equal
                        && r.family.name() < best.family.name())
                {
                    best = r;
                }
            }
            core::cmp::Ordering::Greater => {}
        }
    }
    (best.family, tie)
}

/// Marginal and censoring models refit from a censored sample, used to
/// regenerate censored bootstrap samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapWorld {
    pub margin1: MarginalModel,
    pub margin2: MarginalModel,
    pub censor1: Option<MarginalModel>,
    pub censor2: Option<MarginalModel>,
}

impl BootstrapWorld {
    /// Exponential margins by Kaplan–Meier restricted-mean matching and
    /// exponential censors matched to each margin's censored fraction
    /// (for exponential T with rate λ and censor rate r, P[censored] =
    /// r/(r+λ)).
    pub fn fit(sample: &Sample) -> Result<Self> {
        let rate1 = km_exponential_rate(sample, Margin::First)?;
        let rate2 = km_exponential_rate(sample, Margin::Second)?;
        let censor_for = |margin: Margin, rate: f64| -> Option<MarginalModel> {
            let p = sample.censored_fraction_margin(margin);
            if p <= 0.0 {
                None
            } else {
                let p = p.min(0.95);
                Some(MarginalModel::Exponential { rate: rate * p / (1.0 - p) })
            }
        };
        Ok(BootstrapWorld {
            margin1: MarginalModel::Exponential { rate: rate1 },
            margin2: MarginalModel::Exponential { rate: rate2 },
            censor1: censor_for(Margin::First, rate1),
            censor2: censor_for(Margin::Second, rate2),
        })
    }

    fn config(&self, copula: DependenceParam, n: usize, seed: u64) -> SimulationConfig {
        SimulationConfig {
            copula,
            margin1: self.margin1,
            margin2: self.margin2,
            censor1: self.censor1,
            censor2: self.censor2,
            shared_censor: false,
            limit1: f64::INFINITY,
            limit2: f64::INFINITY,
            n,
            seed,
        }
    }
}

/// Restricted-mean exponential rate from the Kaplan–Meier curve of a margin.
fn km_exponential_rate(sample: &Sample, margin: Margin) -> Result<f64> {
    let km = kaplan_meier(sample, margin, false)?;
    let max_obs = sample
        .observations()
        .iter()
        .map(|o| o.value(margin))
        .fold(0.0f64, f64::max);
    if km.is_degenerate() || max_obs <= 0.0 {
        return Err(Error::Degenerate("margin carries no uncensored values"));
    }
    // ∫ S(t) dt over [0, max_obs] with S = 1 - F̃, exact on the step function.
    let mut mean = 0.0;
    let mut prev_x = 0.0;
    let mut survival = 1.0;
    for (x, _) in km.masses() {
        mean += survival * (x.min(max_obs) - prev_x);
        survival = 1.0 - km.eval(x);
        prev_x = x.min(max_obs);
    }
    if prev_x < max_obs {
        mean += survival * (max_obs - prev_x);
    }
    if !(mean > 0.0) {
        return Err(Error::Degenerate("restricted mean is zero"));
    }
    Ok(1.0 / mean)
}

/// Bootstrap pseudo p-values for a candidate set.
#[derive(Debug, Clone)]
pub struct BootstrapOutcome {
    /// Per candidate: fraction of replicates in which the candidate was NOT
    /// the strict L² winner; the best-fitted model has the smallest value.
    pub p_values: Vec<(CopulaFamily, f64)>,
    pub winner: CopulaFamily,
    pub dropped_replicates: usize,
}

const FAMILY_STREAM: fn(CopulaFamily) -> u64 = |f| match f {
    CopulaFamily::Clayton => 1,
    CopulaFamily::Frank => 2,
    CopulaFamily::Gumbel => 3,
    CopulaFamily::Joe => 4,
    CopulaFamily::Independence => 5,
};

/// Parametric bootstrap of the L² criterion:
///
/// 1. fit α̂_m per candidate on the data and fix the data's K̂ curve;
/// 2. for each candidate, generate `B` censored samples of size n from
///    C_{α̂_m} under the refit marginal/censoring world;
/// 3. refit α̂_{m,b} on each replicate and measure D(α̂_{m,b}) against the
///    data curve;
/// 4. pairing the b-th replicate across candidates, count for each candidate
///    the replicates where it fails to be the strict minimum.
///
/// Replicates failing anywhere are dropped for all candidates (the pairing
/// is kept); more than 10% drops abort the run. Deterministic given the
/// seed, and candidate-order equivariant (streams are keyed by family).
pub fn bootstrap_pseudo_p(
    sample: &Sample,
    candidates: &[CopulaFamily],
    b_replicates: usize,
    seed: u64,
    options: &PipelineOptions,
) -> Result<BootstrapOutcome> {
    if candidates.len() < 2 {
        return Err(Error::BadConfig("bootstrap needs at least two candidates"));
    }
    if b_replicates == 0 {
        return Err(Error::BadConfig("B must be at least 1"));
    }
    let data_curve = estimate_curve(sample, options)?;
    let tau = data_curve.tau_hat();
    let world = BootstrapWorld::fit(sample)?;
    let n = sample.len();

    let fitted: Vec<DependenceParam> = candidates
        .iter()
        .map(|&f| DependenceParam::from_tau_clamped(f, tau).0)
        .collect();

    let mut distance = alloc::vec![alloc::vec![f64::NAN; b_replicates]; candidates.len()];
    let mut replicate_ok = alloc::vec![true; b_replicates];
    for (m, &family) in candidates.iter().enumerate() {
        for b in 0..b_replicates {
            let rep_seed = mix_seed(seed, FAMILY_STREAM(family), b as u64);
            let config = world.config(fitted[m], n, rep_seed);
            let d = simulate_censored(&config)
                .and_then(|s| estimate_curve(&s, options))
                .and_then(|curve_b| {
                    let (refit, _) = DependenceParam::from_tau_clamped(family, curve_b.tau_hat());
                    l2_distance(&data_curve, family, refit.alpha())
                });
            match d {
                Ok(v) => distance[m][b] = v,
                Err(_) => replicate_ok[b] = false,
            }
        }
    }

    let kept: Vec<usize> = (0..b_replicates).filter(|&b| replicate_ok[b]).collect();
    let dropped = b_replicates - kept.len();
    if dropped * 10 > b_replicates {
        return Err(Error::TooManyFailures { failed: dropped, total: b_replicates });
    }
    if kept.is_empty() {
        return Err(Error::TooManyFailures { failed: dropped, total: b_replicates });
    }

    let mut not_best = alloc::vec![0usize; candidates.len()];
    for &b in &kept {
        for m in 0..candidates.len() {
            let dm = distance[m][b];
            let others_min = (0..candidates.len())
                .filter(|&l| l != m)
                .map(|l| distance[l][b])
                .fold(f64::INFINITY, f64::min);
            if !(others_min > dm) {
                not_best[m] += 1;
            }
        }
    }
    let p_values: Vec<(CopulaFamily, f64)> = candidates
        .iter()
        .zip(&not_best)
        .map(|(&f, &c)| (f, c as f64 / kept.len() as f64))
        .collect();
    let winner = p_values
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.name().cmp(b.0.name())))
        .unwrap()
        .0;
    Ok(BootstrapOutcome { p_values, winner, dropped_replicates: dropped })
}

/// A pair on the Kendall transform scale: `u` uniform and `v`
/// Kendall-distributed, independent under a correctly specified family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImputedPair {
    pub u: f64,
    pub v: f64,
}

/// Imputes `(U, V)` for one observation given its censoring pattern, the
/// hypothesized family, and the marginal survival values `s1 = S1(y1)`,
/// `s2 = S2(y2)` (both in (0, 1)).
///
/// Fully observed pairs transform exactly (no randomness); a censored
/// component draws `V` from its conditional law by monotone bisection of the
/// closed-form case CDF, and recovers or draws `U` per case.
pub fn impute_uv(
    delta1: bool,
    delta2: bool,
    s1: f64,
    s2: f64,
    param: &DependenceParam,
    rng: &mut RngStream,
) -> Result<ImputedPair> {
    if !(s1 > 0.0 && s1 < 1.0 && s2 > 0.0 && s2 < 1.0) {
        return Err(Error::Domain {
            op: "impute_uv",
            detail: "survival values must lie strictly inside (0, 1)",
        });
    }
    let phi1 = param.generator(s1).expect("s1 in (0,1)");
    let phi2 = param.generator(s2).expect("s2 in (0,1)");
    match (delta1, delta2) {
        (true, true) => {
            let v = param.phi_inv(phi1 + phi2);
            Ok(ImputedPair { u: phi1 / (phi1 + phi2), v })
        }
        (false, false) => {
            let joint = param.cdf_unchecked(s1, s2);
            let phi_joint = phi1 + phi2;
            // F1(v) = [v - λ(v) + φ(joint)/φ'(v)] / joint on (0, joint].
            let cdf = |v: f64| {
                (v - param.lambda_unchecked(v) + phi_joint / param.phi_deriv(v)) / joint
            };
            let v = invert_case_cdf("impute_uv case (0,0)", &cdf, joint, rng.uniform())?;
            let phi_v = param.generator(v.min(1.0 - 1e-15)).expect("v in (0,1)");
            let lo = phi1 / phi_v;
            let hi = 1.0 - phi2 / phi_v;
            debug_assert!(hi >= lo - 1e-9, "empty U interval");
            let u = lo + rng.uniform() * (hi - lo).max(0.0);
            Ok(ImputedPair { u: u.clamp(0.0, 1.0), v })
        }
        (true, false) => {
            let joint = param.cdf_unchecked(s1, s2);
            let v = draw_v_single_censored(param, joint, rng)?;
            let phi_v = param.generator(v.min(1.0 - 1e-15)).expect("v in (0,1)");
            let u = (phi1 / phi_v).clamp(0.0, 1.0);
            Ok(ImputedPair { u, v })
        }
        (false, true) => {
            let joint = param.cdf_unchecked(s1, s2);
            let v = draw_v_single_censored(param, joint, rng)?;
            let phi_v = param.generator(v.min(1.0 - 1e-15)).expect("v in (0,1)");
            let u = (1.0 - phi2 / phi_v).clamp(0.0, 1.0);
            Ok(ImputedPair { u, v })
        }
    }
}

/// V with exactly one censored component follows `F(v) = p'(φ(v)) /
/// p'(φ(joint))` on (0, joint], with p = φ⁻¹.
fn draw_v_single_censored(
    param: &DependenceParam,
    joint: f64,
    rng: &mut RngStream,
) -> Result<f64> {
    let denom = param.phi_inv_deriv(param.generator(joint).expect("joint in (0,1)"));
    let cdf = |v: f64| {
        let phi_v = param.generator(v).expect("v in (0,1)");
        param.phi_inv_deriv(phi_v) / denom
    };
    invert_case_cdf("impute_uv single-censored case", &cdf, joint, rng.uniform())
}

/// Monotone bisection of a case CDF on (0, upper].
fn invert_case_cdf<F: Fn(f64) -> f64>(
    op: &'static str,
    cdf: &F,
    upper: f64,
    target: f64,
) -> Result<f64> {
    if !(upper > 0.0) {
        return Err(Error::NoConvergence { op, lo: 0.0, hi: upper, best: f64::NAN });
    }
    let mut lo = upper * 1e-14;
    let mut hi = upper;
    if cdf(lo) >= target {
        return Ok(lo);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let f = cdf(mid);
        if !f.is_finite() {
            return Err(Error::NoConvergence { op, lo, hi, best: mid });
        }
        if f < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * upper {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// How the per-imputation statistics combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineRule {
    /// Average the Fisher z statistics across imputations and refer
    /// `sqrt(n)·Z̄` to N(0, 1). The default.
    MeanZ,
    /// Rubin-style total-variance adjustment with within-variance 1/n.
    Rubin,
}

/// Goodness-of-fit outcome.
#[derive(Debug, Clone)]
pub struct GofResult {
    /// The normal-reference statistic (`sqrt(n)·Z̄` or the Rubin ratio).
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub z_per_imputation: Vec<f64>,
    /// Set when some imputation produced |r| = 1.
    pub degenerate: bool,
    pub combine: CombineRule,
}

/// Multiple-imputation goodness-of-fit test: imputes `(U, V)` for every
/// observation in each of `M` datasets, computes the Fisher z transform of
/// the Pearson correlation per imputation, and refers the combined statistic
/// to the standard normal.
///
/// The marginal values entering the case laws are the rescaled Kaplan–Meier
/// probability transforms of the observations. Under the simulator's
/// coupling these are the copula's own uniforms, so the fully observed case
/// is the exact Kendall transform; censored cases are drawn from the
/// conditional case laws at those values.
pub fn wang_gof(
    sample: &Sample,
    family: CopulaFamily,
    alpha: f64,
    m_imputations: usize,
    seed: u64,
    combine: CombineRule,
) -> Result<GofResult> {
    if m_imputations == 0 {
        return Err(Error::BadConfig("M must be at least 1"));
    }
    let param = if family == CopulaFamily::Independence {
        DependenceParam::independence()
    } else {
        DependenceParam::new(family, alpha)?
    };
    let n = sample.len();
    let km1 = kaplan_meier(sample, Margin::First, true)?;
    let km2 = kaplan_meier(sample, Margin::Second, true)?;
    if km1.is_degenerate() || km2.is_degenerate() {
        return Err(Error::Degenerate("wang_gof needs nondegenerate margins"));
    }
    let lo = 1.0 / (n as f64 + 1.0);
    let hi = n as f64 / (n as f64 + 1.0);
    let transforms: Vec<(f64, f64)> = sample
        .observations()
        .iter()
        .map(|o| (km1.eval(o.y1).clamp(lo, hi), km2.eval(o.y2).clamp(lo, hi)))
        .collect();

    let mut z_values = Vec::with_capacity(m_imputations);
    for m in 0..m_imputations {
        let mut rng = RngStream::substream(seed, m as u64);
        let mut us = Vec::with_capacity(n);
        let mut vs = Vec::with_capacity(n);
        for (o, &(s1, s2)) in sample.observations().iter().zip(&transforms) {
            let pair = impute_uv(o.delta1, o.delta2, s1, s2, &param, &mut rng)?;
            us.push(pair.u);
            vs.push(pair.v);
        }
        // Correlate the folded uniform |2U-1| with V. Under the null any
        // transform of U is independent of V, so the reference distribution
        // is unchanged; without the fold the exchangeability of the data
        // (U <-> 1-U) forces the plain correlation to zero under every
        // symmetric alternative as well, and the test would carry no power.
        for u in &mut us {
            *u = fm::abs(2.0 * *u - 1.0);
        }
        let r = pearson(&us, &vs)?;
        if fm::abs(r) >= 1.0 - 1e-12 {
            return Ok(GofResult {
                statistic: f64::INFINITY,
                p_value: 0.0,
                z_per_imputation: z_values,
                degenerate: true,
                combine,
            });
        }
        z_values.push(fm::atanh(r));
    }

    let mean_z = z_values.iter().sum::<f64>() / m_imputations as f64;
    let statistic = match combine {
        CombineRule::MeanZ => fm::sqrt(n as f64) * mean_z,
        CombineRule::Rubin => {
            if m_imputations == 1 {
                fm::sqrt(n as f64) * mean_z
            } else {
                let between = z_values
                    .iter()
                    .map(|z| (z - mean_z) * (z - mean_z))
                    .sum::<f64>()
                    / (m_imputations - 1) as f64;
                let total = 1.0 / n as f64 + (1.0 + 1.0 / m_imputations as f64) * between;
                mean_z / fm::sqrt(total)
            }
        }
    };
    let p_value = 2.0 * (1.0 - normal_cdf(fm::abs(statistic)));
    Ok(GofResult { statistic, p_value, z_per_imputation: z_values, degenerate: false, combine })
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::Degenerate("constant imputed coordinates"));
    }
    Ok(sxy / fm::sqrt(sxx * syy))
}

/// End-to-end selection: omnibus table, L² distances, bootstrap pseudo
/// p-values (when `b_replicates > 0`), and the goodness-of-fit p per
/// candidate (when `m_imputations > 0`).
pub fn select(
    sample: &Sample,
    candidates: &[CopulaFamily],
    b_replicates: usize,
    m_imputations: usize,
    seed: u64,
    options: &PipelineOptions,
    combine: CombineRule,
) -> Result<SelectionReport> {
    let omnibus = omnibus_table(sample, candidates, options)?;
    let mut results = omnibus.results;
    let mut notes = Vec::new();
    let mut dropped = 0usize;
    if omnibus.tau_clamped {
        notes.push(String::from("raw tau_hat fell outside [-1, 1] and was clamped"));
    }

    if b_replicates > 0 && candidates.len() >= 2 {
        let boot = bootstrap_pseudo_p(sample, candidates, b_replicates, seed, options)?;
        dropped = boot.dropped_replicates;
        for (r, &(f, p)) in results.iter_mut().zip(&boot.p_values) {
            debug_assert_eq!(r.family, f);
            r.pseudo_p = Some(p);
        }
    }
    if m_imputations > 0 {
        for r in &mut results {
            let gof = wang_gof(
                sample,
                r.family,
                r.alpha_hat,
                m_imputations,
                mix_seed(seed, FAMILY_STREAM(r.family), 0x60f),
                combine,
            )?;
            r.gof_p = Some(gof.p_value);
            if gof.degenerate {
                notes.push(alloc::format!("gof degenerate correlation for {}", r.family));
            }
        }
    }
    for r in &results {
        if r.alpha_hat_clamped {
            notes.push(alloc::format!("tau_hat clamped to admissible range for {}", r.family));
        }
    }

    let winner_l2 = results
        .iter()
        .min_by(|a, b| a.l2_distance.partial_cmp(&b.l2_distance).unwrap())
        .map(|r| r.family);
    let winner_pseudo = results
        .iter()
        .filter_map(|r| r.pseudo_p.map(|p| (r.family, p)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|x| x.0);
    let winner_gof = results
        .iter()
        .filter_map(|r| r.gof_p.map(|p| (r.family, p)))
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|x| x.0);

    Ok(SelectionReport {
        tau_hat: omnibus.tau_hat,
        n: sample.len(),
        scenario: sample.hint(),
        results,
        winner_omnibus: Some(omnibus.winner),
        winner_l2,
        winner_pseudo_p: winner_pseudo,
        winner_gof,
        dropped_bootstrap: dropped,
        notes,
    })
}
