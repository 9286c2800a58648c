//! Shared numerical routines: adaptive quadrature, bracketed root finding,
//! scalar maximization, and normal distribution helpers.

use crate::fm;
use crate::Error;

/// 21-point Gauss–Kronrod abscissae (positive half, Kronrod points).
#[allow(clippy::excessive_precision)]
const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Embedded 10-point Gauss weights.
#[allow(clippy::excessive_precision)]
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// 21-point Kronrod weights.
#[allow(clippy::excessive_precision)]
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One Gauss–Kronrod 21/10 panel. Returns the Kronrod estimate and the
/// absolute difference to the embedded Gauss estimate (error proxy).
fn gk21_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK21[10];
    let mut gauss = 0.0;
    for (j, wg) in WG10.iter().enumerate() {
        let x = half * XGK21[2 * j + 1];
        let fsum = f(center - x) + f(center + x);
        gauss += wg * fsum;
        kronrod += WGK21[2 * j + 1] * fsum;
    }
    for j in 0..5 {
        let x = half * XGK21[2 * j];
        kronrod += WGK21[2 * j] * (f(center - x) + f(center + x));
    }
    (kronrod * half, fm::abs((kronrod - gauss) * half))
}

/// Adaptive Gauss–Kronrod quadrature of `f` over `[a, b]` to relative
/// tolerance `rel_tol` (with a small absolute floor for integrals near zero).
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Global adaptivity: repeatedly bisect the panel with the largest error
    // estimate until the summed error meets the target or the panel budget
    // runs out. Bounded work regardless of endpoint singularities.
    const MAX_PANELS: usize = 512;
    let mut panels: alloc::vec::Vec<(f64, f64, f64, f64)> = alloc::vec::Vec::new();
    let (v, e) = gk21_panel(f, a, b);
    panels.push((a, b, v, e));
    loop {
        let mut total = 0.0;
        let mut err = 0.0;
        let mut worst = 0usize;
        let mut worst_err = -1.0;
        for (i, p) in panels.iter().enumerate() {
            total += p.2;
            err += p.3;
            if p.3 > worst_err {
                worst_err = p.3;
                worst = i;
            }
        }
        if err <= rel_tol * fm::abs(total) + 1e-300
            || panels.len() >= MAX_PANELS
            || worst_err <= 0.0
        {
            return total;
        }
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk21_panel(f, pa, m);
        let (v2, e2) = gk21_panel(f, m, pb);
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
    }
}

/// Bisection for `f(x) = 0` on a bracket with opposite signs. Converges to
/// `|f| <= tol_f` or bracket width `<= tol_x`, whichever comes first.
pub fn bisect_root<F: Fn(f64) -> f64>(
    op: &'static str,
    f: &F,
    mut lo: f64,
    mut hi: f64,
    tol_x: f64,
    tol_f: f64,
) -> Result<f64, Error> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::NoConvergence { op, lo, hi, best: if fm::abs(flo) < fm::abs(fhi) { lo } else { hi } });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fm::abs(fmid) <= tol_f || (hi - lo) <= tol_x {
            return Ok(mid);
        }
        if flo * fmid <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fmid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section maximization of a unimodal `f` on `[lo, hi]`.
/// Returns the argmax to absolute tolerance `tol_x`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol_x: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol_x {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Standard normal CDF via the complementary error function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * fm::erfc(-x * core::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation refined with one
/// Halley step against the erfc-based CDF (relative error near machine level).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "normal_quantile needs p in (0,1)");
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = fm::sqrt(-2.0 * fm::ln(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = fm::sqrt(-2.0 * fm::ln(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement toward the erfc-accurate CDF.
    let e = normal_cdf(x) - p;
    let u = e * fm::sqrt(2.0 * core::f64::consts::PI) * fm::exp(0.5 * x * x);
    x - u / (1.0 + 0.5 * x * u)
}

/// First-order Debye function `D1(x) = (1/x) ∫_0^x t/(e^t - 1) dt` for `x > 0`.
pub fn debye1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let integrand = |t: f64| {
        if t < 1e-8 {
            1.0 - 0.5 * t
        } else {
            t / fm::exp_m1(t)
        }
    };
    integrate(&integrand, 0.0, x, 1e-12) / x
}
