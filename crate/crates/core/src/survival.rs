//! Nonparametric distribution estimators under censoring: Kaplan–Meier
//! marginals, the Beran kernel-conditional estimator, the joint estimator
//! combining conditional estimates over both margins, its single-censoring
//! predecessor, and the complete-data bivariate ECDF.
//!
//! Joint estimates carry their point masses on the product lattice of
//! uncensored marginal values. The empirical Kendall machinery in
//! [`crate::kendall`] consumes those masses directly.

use crate::censored::{Margin, Sample};
use crate::fm;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Kernel shape for conditional weights. Kernels are symmetric and integrate
/// to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelShape {
    Epanechnikov,
    Gaussian,
    Uniform,
}

impl KernelShape {
    pub fn name(&self) -> &'static str {
        match self {
            KernelShape::Epanechnikov => "epanechnikov",
            KernelShape::Gaussian => "gaussian",
            KernelShape::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "epanechnikov" => Some(KernelShape::Epanechnikov),
            "gaussian" => Some(KernelShape::Gaussian),
            "uniform" => Some(KernelShape::Uniform),
            _ => None,
        }
    }
}

/// A kernel with its bandwidth, in the same units as the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    shape: KernelShape,
    bandwidth: f64,
}

impl KernelSpec {
    pub fn new(shape: KernelShape, bandwidth: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::BadConfig("bandwidth must be positive and finite"));
        }
        Ok(KernelSpec { shape, bandwidth })
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    fn weight(&self, distance: f64) -> f64 {
        let x = distance / self.bandwidth;
        match self.shape {
            KernelShape::Epanechnikov => {
                if fm::abs(x) <= 1.0 {
                    0.75 * (1.0 - x * x)
                } else {
                    0.0
                }
            }
            KernelShape::Gaussian => {
                fm::exp(-0.5 * x * x) * 0.398_942_280_401_432_7
            }
            KernelShape::Uniform => {
                if fm::abs(x) <= 1.0 {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }
}

/// Rule-of-thumb bandwidth `c * sigma_hat * n^{-1/5}` with a robust scale of
/// the conditioning margin (IQR/1.349, falling back to the standard
/// deviation, then to 1).
pub fn default_bandwidth(sample: &Sample, conditioning: Margin, scale_c: f64) -> f64 {
    let mut values: Vec<f64> =
        sample.observations().iter().map(|o| o.value(conditioning)).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let quantile = |q: f64| -> f64 {
        let pos = q * (n - 1) as f64;
        let lo = pos as usize;
        let hi = (lo + 1).min(n - 1);
        let w = pos - lo as f64;
        values[lo] * (1.0 - w) + values[hi] * w
    };
    let iqr_scale = (quantile(0.75) - quantile(0.25)) / 1.349;
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        fm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
    } else {
        0.0
    };
    let mut scale = if iqr_scale > 0.0 { iqr_scale } else { sd };
    if !(scale > 0.0) {
        scale = 1.0;
    }
    scale_c * scale * fm::powf(n as f64, -0.2)
}

/// Monotone right-continuous step function with value 0 before the first
/// jump. Used for marginal CDF estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    jump_points: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// Builds from jump points (strictly increasing) and the CDF values
    /// attained at each jump (nondecreasing, within [0, 1]).
    pub fn new(jump_points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if jump_points.len() != values.len() {
            return Err(Error::BadConfig("jump_points and values must have equal length"));
        }
        if jump_points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadConfig("jump points must be strictly increasing"));
        }
        if values.windows(2).any(|w| w[0] > w[1] + 1e-15) {
            return Err(Error::BadConfig("step function values must be nondecreasing"));
        }
        if values.iter().any(|&v| !((-1e-12..=1.0 + 1e-12).contains(&v))) {
            return Err(Error::BadConfig("step function values must lie in [0, 1]"));
        }
        Ok(StepFunction { jump_points, values })
    }

    /// The all-zero CDF (no jumps); returned for degenerate inputs.
    pub fn zero() -> Self {
        StepFunction { jump_points: Vec::new(), values: Vec::new() }
    }

    /// True when the function carries no jumps (e.g. an all-censored margin).
    pub fn is_degenerate(&self) -> bool {
        self.jump_points.is_empty()
    }

    pub fn jump_points(&self) -> &[f64] {
        &self.jump_points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, y: f64) -> f64 {
        match self.jump_points.partition_point(|&x| x <= y) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }

    /// Total mass assigned (value at the last jump).
    pub fn total(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Jump sizes paired with their locations.
    pub fn masses(&self) -> Vec<(f64, f64)> {
        let mut prev = 0.0;
        self.jump_points
            .iter()
            .zip(&self.values)
            .map(|(&x, &v)| {
                let m = v - prev;
                prev = v;
                (x, m)
            })
            .collect()
    }

    /// Returns a copy with every value multiplied by `factor`.
    fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.values {
            *v *= factor;
        }
        self
    }
}

/// Kaplan–Meier product-limit estimate of the CDF of one margin. Jumps occur
/// only at uncensored values; ties between uncensored and censored points
/// place the uncensored events first. When `rescale` is set every value is
/// multiplied by `n/(n+1)`, which keeps pseudo-observations away from 1.
///
/// An all-censored margin yields the all-zero CDF; callers can detect it with
/// [`StepFunction::is_degenerate`].
pub fn kaplan_meier(sample: &Sample, margin: Margin, rescale: bool) -> Result<StepFunction> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = sample.len();
    let mut points: Vec<(f64, bool)> = sample
        .observations()
        .iter()
        .map(|o| (o.value(margin), o.delta(margin)))
        .collect();
    points.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap().then_with(|| b.1.cmp(&a.1))
    });

    let mut jump_points = Vec::new();
    let mut values = Vec::new();
    let mut survival = 1.0;
    let mut i = 0;
    while i < n {
        let value = points[i].0;
        let at_risk = (n - i) as f64;
        let mut deaths = 0usize;
        let mut j = i;
        while j < n && points[j].0 == value {
            if points[j].1 {
                deaths += 1;
            }
            j += 1;
        }
        if deaths > 0 {
            survival *= 1.0 - deaths as f64 / at_risk;
            jump_points.push(value);
            values.push(1.0 - survival);
        }
        i = j;
    }
    let step = StepFunction::new(jump_points, values)?;
    Ok(if rescale { step.scaled(n as f64 / (n + 1) as f64) } else { step })
}

/// A Beran conditional CDF estimate: a step function in the target margin
/// plus a degeneracy flag (all kernel weights vanished).
#[derive(Debug, Clone, PartialEq)]
pub struct BeranCurve {
    pub cdf: StepFunction,
    pub degenerate: bool,
}

/// Beran kernel-conditional estimator of `F_{target | other}(y | given)`:
/// a product-limit estimate over uncensored target-margin observations with
/// Nadaraya–Watson weights in the conditioning margin. Weights vanish at
/// censored conditioning points and are normalized over the uncensored ones.
///
/// `given` must be an uncensored observed value of the conditioning margin.
pub fn beran_conditional_curve(
    sample: &Sample,
    target: Margin,
    given: f64,
    kernel: &KernelSpec,
) -> Result<BeranCurve> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let conditioning = target.other();
    let observed_uncensored = sample
        .observations()
        .iter()
        .any(|o| o.delta(conditioning) && o.value(conditioning) == given);
    if !observed_uncensored {
        return Err(Error::ConditioningPointCensored);
    }
    Ok(beran_curve_inner(sample, target, given, kernel))
}

/// Point evaluation of the Beran estimator at `y`.
pub fn beran_conditional(
    sample: &Sample,
    target: Margin,
    y: f64,
    given: f64,
    kernel: &KernelSpec,
) -> Result<f64> {
    let curve = beran_conditional_curve(sample, target, given, kernel)?;
    Ok(curve.cdf.eval(y))
}

/// Shared worker: weights may legitimately be all zero here (interior use by
/// the joint estimator tolerates it and flags the curve degenerate).
fn beran_curve_inner(sample: &Sample, target: Margin, given: f64, kernel: &KernelSpec) -> BeranCurve {
    let conditioning = target.other();
    let obs = sample.observations();
    let n = obs.len();

    let mut weights = vec![0.0f64; n];
    let mut total = 0.0;
    for (i, o) in obs.iter().enumerate() {
        if o.delta(conditioning) {
            let w = kernel.weight(given - o.value(conditioning));
            weights[i] = w;
            total += w;
        }
    }
    if !(total > 0.0) {
        return BeranCurve { cdf: StepFunction::zero(), degenerate: true };
    }
    for w in &mut weights {
        *w /= total;
    }

    // Sort by target value; suffix sums give the at-risk weight.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| obs[a].value(target).partial_cmp(&obs[b].value(target)).unwrap());
    let mut risk_after = vec![0.0f64; n + 1];
    for k in (0..n).rev() {
        risk_after[k] = risk_after[k + 1] + weights[order[k]];
    }

    let mut jump_points = Vec::new();
    let mut values = Vec::new();
    let mut survival = 1.0;
    let mut k = 0;
    while k < n {
        let value = obs[order[k]].value(target);
        let risk = risk_after[k];
        let mut j = k;
        let mut product = 1.0;
        while j < n && obs[order[j]].value(target) == value {
            let i = order[j];
            let w = weights[i];
            if obs[i].delta(target) && w > 0.0 && risk > 0.0 {
                product *= 1.0 - (w / risk).min(1.0);
            }
            j += 1;
        }
        if product < 1.0 {
            survival *= product;
            jump_points.push(value);
            values.push((1.0 - survival).clamp(0.0, 1.0));
        }
        k = j;
    }
    let cdf = StepFunction::new(jump_points, values).unwrap_or_else(|_| StepFunction::zero());
    BeranCurve { cdf, degenerate: false }
}

/// Bivariate distribution estimate: point masses on the product lattice of
/// marginal support points, with a CDF accessor via inclusive prefix sums.
///
/// Masses are stored in raw weight units with a common denominator, so
/// integer-weight estimates (the ECDF) keep exact tie structure; `cdf` and
/// `total_mass` report values on the estimator's own scale.
#[derive(Debug, Clone)]
pub struct JointDistributionEstimate {
    xs: Vec<f64>,
    ys: Vec<f64>,
    mass: Vec<f64>,
    prefix: Vec<f64>,
    denom: f64,
    n: usize,
    degenerate_branch: bool,
}

impl JointDistributionEstimate {
    fn from_mass(
        xs: Vec<f64>,
        ys: Vec<f64>,
        mut mass: Vec<f64>,
        denom: f64,
        n: usize,
        degenerate_branch: bool,
    ) -> Result<Self> {
        // Negative-mass repair: clamp float dust to zero and redistribute the
        // clamped total proportionally over the positive masses, preserving
        // the total.
        let mut neg = 0.0;
        let mut pos = 0.0;
        for m in mass.iter() {
            if *m < 0.0 {
                neg += *m;
            } else {
                pos += *m;
            }
        }
        if neg < 0.0 && pos > 0.0 {
            let factor = (pos + neg) / pos;
            for m in mass.iter_mut() {
                *m = if *m < 0.0 { 0.0 } else { *m * factor };
            }
        }
        let total: f64 = mass.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass("joint distribution estimate"));
        }

        let cols = ys.len();
        let mut prefix = vec![0.0f64; xs.len() * cols];
        for i in 0..xs.len() {
            let mut row_sum = 0.0;
            for j in 0..cols {
                row_sum += mass[i * cols + j];
                let above = if i > 0 { prefix[(i - 1) * cols + j] } else { 0.0 };
                prefix[i * cols + j] = above + row_sum;
            }
        }
        Ok(JointDistributionEstimate { xs, ys, mass, prefix, denom, n, degenerate_branch })
    }

    /// Number of observations behind the estimate.
    pub fn sample_size(&self) -> usize {
        self.n
    }

    /// True when one conditional branch of the joint estimator was
    /// unavailable (that margin entirely censored) and the other carried the
    /// full weight.
    pub fn degenerate_branch(&self) -> bool {
        self.degenerate_branch
    }

    /// Lattice of margin-1 support points.
    pub fn grid_x(&self) -> &[f64] {
        &self.xs
    }

    /// Lattice of margin-2 support points.
    pub fn grid_y(&self) -> &[f64] {
        &self.ys
    }

    /// CDF accessor on the estimator's scale.
    pub fn cdf(&self, y1: f64, y2: f64) -> f64 {
        let i = self.xs.partition_point(|&x| x <= y1);
        let j = self.ys.partition_point(|&y| y <= y2);
        if i == 0 || j == 0 {
            0.0
        } else {
            self.prefix[(i - 1) * self.ys.len() + (j - 1)] / self.denom
        }
    }

    /// Total assigned mass (≤ 1; shy of 1 when marginal tails are censored).
    pub fn total_mass(&self) -> f64 {
        self.prefix[self.prefix.len() - 1] / self.denom
    }

    /// Raw total weight (CDF units times `denom`).
    pub(crate) fn total_weight(&self) -> f64 {
        self.prefix[self.prefix.len() - 1]
    }

    /// Iterates positive-mass cells as `(i, j, weight)`.
    pub(crate) fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.ys.len();
        self.mass.iter().enumerate().filter_map(move |(k, &m)| {
            if m > 0.0 {
                Some((k / cols, k % cols, m))
            } else {
                None
            }
        })
    }

    /// Strictly-below orthant weight of cell `(i, j)`: the summed weight at
    /// lattice points `(x, y)` with `x < xs[i]` and `y < ys[j]`.
    pub(crate) fn strict_lower_weight(&self, i: usize, j: usize) -> f64 {
        if i == 0 || j == 0 {
            0.0
        } else {
            self.prefix[(i - 1) * self.ys.len() + (j - 1)]
        }
    }

    /// Point masses in CDF units, for inspection and tests.
    pub fn point_masses(&self) -> Vec<(f64, f64, f64)> {
        self.cells().map(|(i, j, m)| (self.xs[i], self.ys[j], m / self.denom)).collect()
    }
}

fn sorted_distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

fn index_of(grid: &[f64], value: f64) -> usize {
    grid.partition_point(|&x| x < value)
}

/// Complete-data bivariate ECDF: unit weight at each observation pair,
/// denominator `n`.
pub fn ecdf_bivariate(sample: &Sample) -> Result<JointDistributionEstimate> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !sample.is_complete() {
        return Err(Error::CensoredInput("ecdf_bivariate"));
    }
    let xs = sorted_distinct(sample.observations().iter().map(|o| o.y1));
    let ys = sorted_distinct(sample.observations().iter().map(|o| o.y2));
    let mut mass = vec![0.0f64; xs.len() * ys.len()];
    for o in sample.observations() {
        let i = index_of(&xs, o.y1);
        let j = index_of(&ys, o.y2);
        mass[i * ys.len() + j] += 1.0;
    }
    JointDistributionEstimate::from_mass(xs, ys, mass, sample.len() as f64, sample.len(), false)
}

/// Joint distribution estimator for flexible censoring: a `w`-weighted
/// combination of the two conditional branches, each realized as an exact sum
/// of Beran conditional estimates over the Kaplan–Meier jump points of the
/// conditioning margin.
///
/// With constant `w` both branches produce componentwise-monotone surfaces,
/// so the repair step only has to clean floating-point dust in the masses.
/// If one margin is entirely censored its branch is unavailable; the other
/// branch then carries full weight and the estimate is flagged.
pub fn akritas_joint(
    sample: &Sample,
    kernel: &KernelSpec,
    w: f64,
) -> Result<JointDistributionEstimate> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::BadConfig("w must lie in [0, 1]"));
    }
    let km1 = kaplan_meier(sample, Margin::First, false)?;
    let km2 = kaplan_meier(sample, Margin::Second, false)?;
    let (w1, w2, degenerate) = match (km1.is_degenerate(), km2.is_degenerate()) {
        (false, false) => (w, 1.0 - w, false),
        (false, true) => (0.0, 1.0, true),
        (true, false) => (1.0, 0.0, true),
        (true, true) => return Err(Error::ZeroMass("both margins entirely censored")),
    };

    let xs = sorted_distinct(
        sample.observations().iter().filter(|o| o.delta1).map(|o| o.y1),
    );
    let ys = sorted_distinct(
        sample.observations().iter().filter(|o| o.delta2).map(|o| o.y2),
    );
    let cols = ys.len();
    let mut mass = vec![0.0f64; xs.len() * cols];

    // Branch 1: sum over margin-2 KM jumps of Beran conditionals of margin 1.
    if w1 > 0.0 {
        for (z2, m2) in km2.masses() {
            let curve = beran_curve_inner(sample, Margin::First, z2, kernel);
            if curve.degenerate {
                continue;
            }
            let j = index_of(&ys, z2);
            for (x, dm) in curve.cdf.masses() {
                let i = index_of(&xs, x);
                mass[i * cols + j] += w1 * m2 * dm;
            }
        }
    }
    // Branch 2: mirror image.
    if w2 > 0.0 {
        for (z1, m1) in km1.masses() {
            let curve = beran_curve_inner(sample, Margin::Second, z1, kernel);
            if curve.degenerate {
                continue;
            }
            let i = index_of(&xs, z1);
            for (y, dm) in curve.cdf.masses() {
                let j = index_of(&ys, y);
                mass[i * cols + j] += w2 * m1 * dm;
            }
        }
    }
    JointDistributionEstimate::from_mass(xs, ys, mass, 1.0, sample.len(), degenerate)
}

/// Optional data-driven choice of the branch weight `w`: a nonparametric
/// bootstrap proxy for the mean-squared error of the joint estimate. For
/// each candidate weight, observations are resampled with replacement `b`
/// times and the replicate estimates are compared against the full-sample
/// estimate at the observation pairs; the weight with the smallest average
/// squared deviation wins. Not the default (w = 0.5 stays the default): the
/// proxy sees estimator variability, not bias. Returns the chosen weight and
/// the per-weight scores.
pub fn select_w_by_bootstrap(
    sample: &Sample,
    kernel: &KernelSpec,
    grid: &[f64],
    b: usize,
    seed: u64,
) -> Result<(f64, Vec<(f64, f64)>)> {
    if grid.is_empty() || b == 0 {
        return Err(Error::BadConfig("w search needs a nonempty grid and b >= 1"));
    }
    let obs = sample.observations();
    let full: Vec<JointDistributionEstimate> = grid
        .iter()
        .map(|&w| akritas_joint(sample, kernel, w))
        .collect::<Result<_>>()?;
    let mut scores = vec![0.0f64; grid.len()];
    let mut used = 0usize;
    for rep in 0..b {
        let mut rng = crate::rng::RngStream::substream(seed, rep as u64);
        let resampled: Vec<crate::censored::Observation> = (0..obs.len())
            .map(|_| obs[(rng.uniform() * obs.len() as f64) as usize % obs.len()])
            .collect();
        let Ok(boot) = Sample::infer(resampled) else { continue };
        let estimates: Vec<_> = grid.iter().map(|&w| akritas_joint(&boot, kernel, w)).collect();
        if estimates.iter().any(|e| e.is_err()) {
            continue;
        }
        used += 1;
        for (k, est) in estimates.into_iter().enumerate() {
            let est = est.expect("checked above");
            for o in obs {
                let d = est.cdf(o.y1, o.y2) - full[k].cdf(o.y1, o.y2);
                scores[k] += d * d;
            }
        }
    }
    if used * 2 < b {
        return Err(Error::TooManyFailures { failed: b - used, total: b });
    }
    let denom = (used * obs.len()) as f64;
    let table: Vec<(f64, f64)> = grid.iter().zip(&scores).map(|(&w, &s)| (w, s / denom)).collect();
    let best = table
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("nonempty grid")
        .0;
    Ok((best, table))
}

/// Single-censoring joint estimator: with margin 2 fully observed, averages
/// the Beran conditional of margin 1 over the empirical law of margin 2,
/// `F(y1, t2) = (1/n) Σ_k 1[t2_k <= t2] F_{1|2}(y1 | t2_k)`.
pub fn avk_joint_single(sample: &Sample, kernel: &KernelSpec) -> Result<JointDistributionEstimate> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !sample.observations().iter().all(|o| o.delta2) {
        return Err(Error::ScenarioMismatch("avk_joint_single"));
    }
    let n = sample.len();
    let xs = sorted_distinct(
        sample.observations().iter().filter(|o| o.delta1).map(|o| o.y1),
    );
    let ys = sorted_distinct(sample.observations().iter().map(|o| o.y2));
    let cols = ys.len();
    let mut mass = vec![0.0f64; xs.len() * cols];
    for o in sample.observations() {
        let curve = beran_curve_inner(sample, Margin::First, o.y2, kernel);
        if curve.degenerate {
            continue;
        }
        let j = index_of(&ys, o.y2);
        for (x, dm) in curve.cdf.masses() {
            let i = index_of(&xs, x);
            mass[i * cols + j] += dm;
        }
    }
    JointDistributionEstimate::from_mass(xs, ys, mass, n as f64, n, false)
}
