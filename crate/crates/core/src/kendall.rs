//! Empirical Kendall distribution, λ̂ and τ̂, and the nonparametric
//! Archimedean generator estimate.
//!
//! Two routes produce a [`KendallCurve`]: the complete-data counting
//! estimator (pseudo-observations from strict lower-orthant counts) and the
//! censoring-robust route that integrates the indicator against a joint
//! distribution estimate. Conventions are matched so that on complete data
//! the joint route through the bivariate ECDF reproduces the counting
//! estimator exactly: the joint route evaluates each mass point's strictly
//! smaller orthant weight and rescales by `n/(n-1)`.

use crate::censored::{Sample, ScenarioHint};
use crate::copula::{CopulaFamily, DependenceParam};
use crate::fm;
use crate::survival::{
    akritas_joint, avk_joint_single, default_bandwidth, JointDistributionEstimate,
    KernelShape, KernelSpec,
};
use crate::{Error, Result};
use alloc::string::String;
use alloc::vec::Vec;

/// Which estimator produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSource {
    /// Complete-data counting estimator.
    CountingComplete,
    /// Indicator integral against a joint distribution estimate.
    WangWells,
}

/// Empirical Kendall distribution: a step function on a grid of ν values,
/// with λ̂(ν) = ν - K̂(ν) available by identity and the exact step-integral
/// τ̂.
#[derive(Debug, Clone, PartialEq)]
pub struct KendallCurve {
    nu: Vec<f64>,
    k: Vec<f64>,
    source: CurveSource,
    n: usize,
}

impl KendallCurve {
    /// Builds a curve from grid points and K values (used by tests and the
    /// analytic-curve helpers). Grid must be strictly increasing in [0, 1],
    /// K nondecreasing in [0, 1].
    pub fn from_grid(nu: Vec<f64>, k: Vec<f64>, source: CurveSource, n: usize) -> Result<Self> {
        if nu.is_empty() || nu.len() != k.len() {
            return Err(Error::BadConfig("grid and K must be nonempty and equal length"));
        }
        if nu.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadConfig("nu grid must be strictly increasing"));
        }
        if nu.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::BadConfig("nu grid must lie in [0, 1]"));
        }
        if k.windows(2).any(|w| w[0] > w[1] + 1e-12) {
            return Err(Error::BadConfig("K values must be nondecreasing"));
        }
        Ok(KendallCurve { nu, k, source, n })
    }

    /// The analytic Kendall curve of a parametric copula on a regular grid;
    /// handy as an oracle and for candidate overlays.
    pub fn analytic(param: &DependenceParam, points: usize) -> Self {
        let points = points.max(2);
        let nu: Vec<f64> = (1..=points).map(|i| i as f64 / points as f64).collect();
        let k: Vec<f64> = nu.iter().map(|&v| param.kendall_unchecked(v)).collect();
        KendallCurve { nu, k, source: CurveSource::WangWells, n: points }
    }

    pub fn nu_grid(&self) -> &[f64] {
        &self.nu
    }

    pub fn k_values(&self) -> &[f64] {
        &self.k
    }

    /// λ̂ values on the grid, identically ν - K̂(ν).
    pub fn lambda_values(&self) -> Vec<f64> {
        self.nu.iter().zip(&self.k).map(|(&v, &k)| v - k).collect()
    }

    pub fn source(&self) -> CurveSource {
        self.source
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    /// True when the raw τ̂ falls outside [-1, 1] (a finite-sample
    /// artifact) and [`Self::tau_hat`] clamps it.
    pub fn tau_clamped(&self) -> bool {
        !(-1.0..=1.0).contains(&self.tau_hat_raw())
    }

    /// Right-continuous step evaluation of K̂.
    pub fn eval(&self, nu: f64) -> f64 {
        match self.nu.partition_point(|&x| x <= nu) {
            0 => 0.0,
            k => self.k[k - 1],
        }
    }

    /// Exact integral of the step function K̂ over [0, 1].
    fn integral_k(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.nu.len() {
            let hi = if i + 1 < self.nu.len() { self.nu[i + 1].min(1.0) } else { 1.0 };
            let lo = self.nu[i].min(1.0);
            if hi > lo {
                acc += self.k[i] * (hi - lo);
            }
        }
        acc
    }

    /// τ̂ = 3 - 4∫₀¹ K̂, clamped to [-1, 1].
    pub fn tau_hat(&self) -> f64 {
        self.tau_hat_raw().clamp(-1.0, 1.0)
    }

    /// The unclamped step-integral value.
    pub fn tau_hat_raw(&self) -> f64 {
        3.0 - 4.0 * self.integral_k()
    }

    /// τ̂ through the λ̂ route, 1 + 4∫₀¹ λ̂ with ∫λ̂ = 1/2 - ∫K̂; agrees
    /// with [`Self::tau_hat_raw`] to rounding.
    pub fn tau_hat_via_lambda(&self) -> f64 {
        1.0 + 4.0 * (0.5 - self.integral_k())
    }
}

/// Counting estimator for complete data: pseudo-observations `nu_i =
/// #{j: y1_j < y1_i and y2_j < y2_i} / (n - 1)` and `K̂(ν)` their empirical
/// CDF.
pub fn kendall_counting(sample: &Sample) -> Result<KendallCurve> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !sample.is_complete() {
        return Err(Error::CensoredInput("kendall_counting"));
    }
    let n = sample.len();
    if n < 2 {
        return Err(Error::BadConfig("counting estimator needs at least 2 observations"));
    }
    let counts = strict_lower_counts(sample);
    let mut nus: Vec<f64> = counts.iter().map(|&c| c as f64 / (n - 1) as f64).collect();
    nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut grid = Vec::new();
    let mut k = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && nus[j] == nus[i] {
            j += 1;
        }
        grid.push(nus[i]);
        k.push(j as f64 / n as f64);
        i = j;
    }
    Ok(KendallCurve { nu: grid, k, source: CurveSource::CountingComplete, n })
}

/// Strict lower-orthant counts via a Fenwick tree over the rank of y2,
/// processing y1 groups in order so ties never count.
fn strict_lower_counts(sample: &Sample) -> Vec<usize> {
    let obs = sample.observations();
    let n = obs.len();
    let mut y2_sorted: Vec<f64> = obs.iter().map(|o| o.y2).collect();
    y2_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    y2_sorted.dedup();
    let rank2 = |y: f64| y2_sorted.partition_point(|&v| v < y);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| obs[a].y1.partial_cmp(&obs[b].y1).unwrap());

    let mut tree = Fenwick::new(y2_sorted.len() + 1);
    let mut counts = alloc::vec![0usize; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && obs[order[j]].y1 == obs[order[i]].y1 {
            j += 1;
        }
        for &idx in &order[i..j] {
            counts[idx] = tree.prefix(rank2(obs[idx].y2));
        }
        for &idx in &order[i..j] {
            tree.add(rank2(obs[idx].y2) + 1);
        }
        i = j;
    }
    counts
}

struct Fenwick {
    tree: Vec<usize>,
}

impl Fenwick {
    fn new(len: usize) -> Self {
        Fenwick { tree: alloc::vec![0; len + 1] }
    }

    /// Count of inserted positions strictly below `pos` (0-based exclusive).
    fn prefix(&self, pos: usize) -> usize {
        let mut i = pos;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }

    fn add(&mut self, pos: usize) {
        let mut i = pos;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }
}

/// How a sub-stochastic joint estimate (censored tails leave mass
/// unassigned) maps onto a Kendall curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MassConvention {
    /// Renormalize masses and ν values by the total assigned mass: the curve
    /// is the Kendall distribution of the renormalized law and always
    /// reaches 1.
    Renormalized,
    /// Literal plug-in: masses and ν values enter as estimated, the curve
    /// tops out at the total assigned mass.
    PlugIn,
}

/// Kendall curve from a joint distribution estimate: each positive-mass cell
/// contributes its weight at `ν = strictly-lower-orthant mass × n/(n-1)`, and
/// K̂ is the CDF of those ν values under the chosen mass convention. On the
/// bivariate ECDF (total mass 1) both conventions reproduce
/// [`kendall_counting`] exactly.
pub fn kendall_from_joint_with(
    joint: &JointDistributionEstimate,
    convention: MassConvention,
) -> Result<KendallCurve> {
    let total = joint.total_weight();
    if !(total > 0.0) {
        return Err(Error::ZeroMass("kendall_from_joint"));
    }
    let n = joint.sample_size();
    if n < 2 {
        return Err(Error::BadConfig("kendall estimator needs at least 2 observations"));
    }
    // In plug-in mode ν and mass stay on the estimator's own scale; the
    // denominator then only converts raw weights into CDF units.
    let mass_unit = joint.total_weight() / joint.total_mass();
    let (nu_total, k_total) = match convention {
        MassConvention::Renormalized => (total, total),
        MassConvention::PlugIn => (mass_unit, mass_unit),
    };
    let nu_scale = n as f64 / ((n - 1) as f64 * nu_total);
    let mut cells: Vec<(f64, f64)> = joint
        .cells()
        .map(|(i, j, m)| ((joint.strict_lower_weight(i, j) * nu_scale).min(1.0), m))
        .collect();
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut grid = Vec::new();
    let mut k = Vec::new();
    let mut cum = 0.0;
    let mut i = 0;
    while i < cells.len() {
        let nu = cells[i].0;
        let mut j = i;
        while j < cells.len() && cells[j].0 == nu {
            cum += cells[j].1;
            j += 1;
        }
        grid.push(nu);
        k.push((cum / k_total).min(1.0));
        i = j;
    }
    if convention == MassConvention::Renormalized {
        if let Some(last) = k.last_mut() {
            *last = 1.0;
        }
    }
    Ok(KendallCurve { nu: grid, k, source: CurveSource::WangWells, n })
}

/// [`kendall_from_joint_with`] under the renormalized convention.
pub fn kendall_from_joint(joint: &JointDistributionEstimate) -> Result<KendallCurve> {
    kendall_from_joint_with(joint, MassConvention::Renormalized)
}

/// Convenience: τ̂ of a curve (Eq. 6 route; the λ̂ route agrees by identity).
pub fn tau_hat(curve: &KendallCurve) -> f64 {
    curve.tau_hat()
}

/// Nonparametric generator estimate `φ̂(ν) = exp{∫_{ν₀}^ν dt/(t - K̂(t))}`,
/// normalized to φ̂(ν₀) = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorEstimate {
    nu: Vec<f64>,
    phi: Vec<f64>,
    nu0: f64,
    /// Number of grid cells excluded for near-singular `t - K̂(t)`.
    pub excluded_cells: usize,
}

impl GeneratorEstimate {
    pub fn nu_grid(&self) -> &[f64] {
        &self.nu
    }

    pub fn phi_values(&self) -> &[f64] {
        &self.phi
    }

    pub fn nu0(&self) -> f64 {
        self.nu0
    }

    pub fn eval(&self, nu: f64) -> f64 {
        match self.nu.partition_point(|&x| x <= nu) {
            0 => self.phi[0],
            k => self.phi[k - 1],
        }
    }
}

const NU_EPS: f64 = 1e-6;
const SINGULAR_EPS: f64 = 1e-10;

/// Integrates `1/(t - K̂(t))` by cumulative trapezoid on the ν grid
/// (curve jump points plus the endpoints {ε, 1}), excluding cells where the
/// integrand is singular and interpolating `log φ̂` across them.
///
/// The grid does not depend on ν₀; the anchor is the grid cell containing
/// ν₀, so estimates at different ν₀ differ by an exact constant factor.
pub fn generator_estimate(curve: &KendallCurve, nu0: f64) -> Result<GeneratorEstimate> {
    if !(nu0 > 0.0 && nu0 < 1.0) {
        return Err(Error::Domain { op: "generator_estimate", detail: "nu0 must lie in (0, 1)" });
    }
    let mut grid: Vec<f64> = curve.nu_grid().iter().copied().filter(|&v| v > 0.0).collect();
    grid.push(NU_EPS);
    grid.push(1.0);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    // g(t) = 1/(t - K̂(t)); flagged where |t - K̂(t)| is below the guard.
    let g: Vec<Option<f64>> = grid
        .iter()
        .map(|&t| {
            let d = t - curve.eval(t);
            if fm::abs(d) < SINGULAR_EPS {
                None
            } else {
                Some(1.0 / d)
            }
        })
        .collect();
    if g.iter().all(|v| v.is_none()) {
        return Err(Error::Degenerate("t - K(t) vanishes on the whole grid"));
    }

    // Cumulative trapezoid; singular cells get the width-scaled average of
    // the nearest valid integrand values (log-phi interpolation).
    let mut excluded = 0usize;
    let valid_near = |i: usize| -> f64 {
        let mut lo = i;
        loop {
            if let Some(v) = g[lo] {
                return v;
            }
            if lo == 0 {
                break;
            }
            lo -= 1;
        }
        let mut hi = i;
        while hi < g.len() {
            if let Some(v) = g[hi] {
                return v;
            }
            hi += 1;
        }
        0.0
    };
    let mut cum = alloc::vec![0.0f64; grid.len()];
    for i in 1..grid.len() {
        let width = grid[i] - grid[i - 1];
        let (a, b) = (g[i - 1], g[i]);
        let inc = match (a, b) {
            (Some(a), Some(b)) => 0.5 * (a + b) * width,
            _ => {
                excluded += 1;
                0.5 * (valid_near(i - 1) + valid_near(i)) * width
            }
        };
        cum[i] = cum[i - 1] + inc;
    }

    let anchor = grid.partition_point(|&x| x <= nu0).saturating_sub(1);
    let at_nu0 = cum[anchor];
    let phi: Vec<f64> = cum.iter().map(|&c| fm::exp(c - at_nu0)).collect();
    Ok(GeneratorEstimate { nu: grid, phi, nu0, excluded_cells: excluded })
}

/// Per-candidate overlay columns for the graphical comparison.
#[derive(Debug, Clone)]
pub struct CurveTable {
    pub nu: Vec<f64>,
    pub k_hat: Vec<f64>,
    pub lambda_hat: Vec<f64>,
    /// One entry per retained candidate: family, fitted parameter, K column,
    /// λ column.
    pub candidates: Vec<CandidateCurve>,
    /// Candidates dropped because τ̂ is inadmissible for them, with notes.
    pub skipped: Vec<(CopulaFamily, String)>,
    pub tau_hat: f64,
}

#[derive(Debug, Clone)]
pub struct CandidateCurve {
    pub family: CopulaFamily,
    pub param: DependenceParam,
    pub k: Vec<f64>,
    pub lambda: Vec<f64>,
}

/// Fits each candidate by τ̂ inversion and tabulates its λ/K overlays on the
/// empirical grid. Candidates whose admissible τ range excludes τ̂ are
/// skipped with a note.
pub fn graphical_curves(curve: &KendallCurve, candidates: &[CopulaFamily]) -> Result<CurveTable> {
    if candidates.is_empty() {
        return Err(Error::BadConfig("candidate list is empty"));
    }
    let tau = curve.tau_hat();
    // τ̂ a hair below zero is sampling noise around independence and clamps
    // to the boundary; clearly negative values are inadmissible for the
    // positive-dependence families.
    const NEG_TOLERANCE: f64 = 0.05;
    let mut retained = Vec::new();
    let mut skipped = Vec::new();
    for &family in candidates {
        let admissible = match family {
            CopulaFamily::Independence => true,
            CopulaFamily::Frank => true,
            _ => tau >= -NEG_TOLERANCE,
        };
        if !admissible {
            skipped.push((family, alloc::format!("tau_hat={tau} inadmissible for {family}")));
            continue;
        }
        let (param, _) = DependenceParam::from_tau_clamped(family, tau);
        let k: Vec<f64> = curve.nu_grid().iter().map(|&v| param.kendall_unchecked(v)).collect();
        let lambda: Vec<f64> =
            curve.nu_grid().iter().map(|&v| param.lambda_unchecked(v)).collect();
        retained.push(CandidateCurve { family, param, k, lambda });
    }
    Ok(CurveTable {
        nu: curve.nu_grid().to_vec(),
        k_hat: curve.k_values().to_vec(),
        lambda_hat: curve.lambda_values(),
        candidates: retained,
        skipped,
        tau_hat: tau,
    })
}

/// Which joint estimator drives the Kendall curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    /// Always the flexible-censoring joint estimator.
    Flexible,
    /// Counting on complete data, the single-censoring estimator when only
    /// margin 1 is censored, the flexible estimator otherwise.
    ScenarioMatched,
}

/// Options shared by the estimation pipeline.
#[derive(Debug, Clone, Copy)]
pub struct PipelineOptions {
    pub kernel_shape: KernelShape,
    /// Explicit bandwidth; `None` applies the rule-of-thumb with `bandwidth_c`.
    pub bandwidth: Option<f64>,
    pub bandwidth_c: f64,
    pub w: f64,
    pub estimator: EstimatorChoice,
    pub mass_convention: MassConvention,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            kernel_shape: KernelShape::Epanechnikov,
            bandwidth: None,
            bandwidth_c: 1.0,
            w: 0.5,
            estimator: EstimatorChoice::Flexible,
            mass_convention: MassConvention::Renormalized,
        }
    }
}

impl PipelineOptions {
    pub fn kernel_for(&self, sample: &Sample, conditioning: crate::censored::Margin) -> Result<KernelSpec> {
        let h = match self.bandwidth {
            Some(h) => h,
            None => default_bandwidth(sample, conditioning, self.bandwidth_c),
        };
        KernelSpec::new(self.kernel_shape, h)
    }
}

/// Runs the estimation pipeline from a censored sample to its Kendall curve.
pub fn estimate_curve(sample: &Sample, options: &PipelineOptions) -> Result<KendallCurve> {
    let joint = estimate_joint(sample, options)?;
    match joint {
        JointOrCounting::Counting(curve) => Ok(curve),
        JointOrCounting::Joint(j) => kendall_from_joint_with(&j, options.mass_convention),
    }
}

pub(crate) enum JointOrCounting {
    Counting(KendallCurve),
    Joint(JointDistributionEstimate),
}

pub(crate) fn estimate_joint(sample: &Sample, options: &PipelineOptions) -> Result<JointOrCounting> {
    match options.estimator {
        EstimatorChoice::Flexible => {
            let kernel = options.kernel_for(sample, crate::censored::Margin::Second)?;
            Ok(JointOrCounting::Joint(akritas_joint(sample, &kernel, options.w)?))
        }
        EstimatorChoice::ScenarioMatched => match sample.hint() {
            ScenarioHint::Complete => Ok(JointOrCounting::Counting(kendall_counting(sample)?)),
            ScenarioHint::SingleCensored(crate::censored::Margin::First) => {
                let kernel = options.kernel_for(sample, crate::censored::Margin::Second)?;
                Ok(JointOrCounting::Joint(avk_joint_single(sample, &kernel)?))
            }
            _ => {
                let kernel = options.kernel_for(sample, crate::censored::Margin::Second)?;
                Ok(JointOrCounting::Joint(akritas_joint(sample, &kernel, options.w)?))
            }
        },
    }
}
