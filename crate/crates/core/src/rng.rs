//! Deterministic random streams and the sampling primitives behind the
//! simulation engine.
//!
//! All randomness flows through [`RngStream`]: a ChaCha12 generator with an
//! explicit 64-bit seed and a 64-bit stream id. Replicate `r` of a study draws
//! from `RngStream::substream(seed, r)`, so runs are reproducible bit-for-bit
//! and replicates can execute in parallel without shared state. The generator
//! choice (ChaCha12, seeded via `SeedableRng::seed_from_u64`, streams via
//! `set_stream`) is fixed for reproducibility.

use crate::fm;
use crate::numeric::normal_quantile;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// A seeded, stream-addressable random number generator.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
}

/// SplitMix64 finalizer mixing a base seed with two labels; used to derive
/// independent per-replicate seeds, stable across candidate orderings.
pub fn mix_seed(seed: u64, label_a: u64, label_b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(label_a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(label_b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    /// Stream 0 of the given seed.
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Stream `stream` of the given seed. Distinct streams are independent.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform draw strictly inside (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Unit exponential draw.
    pub fn exp1(&mut self) -> f64 {
        -fm::ln(self.uniform())
    }

    /// Standard normal draw by quantile inversion of a single uniform.
    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    /// Gamma(shape, scale 1) via Marsaglia–Tsang, with the power boost for
    /// shape < 1.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0);
            let u = self.uniform();
            return g * fm::powf(u, 1.0 / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / fm::sqrt(9.0 * d);
        loop {
            let x = self.normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            if fm::ln(u) < 0.5 * x * x + d - d * v + d * fm::ln(v) {
                return d * v;
            }
        }
    }

    /// Positive stable draw with Laplace transform `exp(-s^beta)`, `beta` in
    /// (0, 1), via Kanter's representation.
    pub fn positive_stable(&mut self, beta: f64) -> f64 {
        debug_assert!(beta > 0.0 && beta < 1.0);
        let theta = core::f64::consts::PI * self.uniform();
        let e = self.exp1();
        let ln_a = beta / (1.0 - beta) * fm::ln(fm::sin(beta * theta))
            + fm::ln(fm::sin((1.0 - beta) * theta))
            - 1.0 / (1.0 - beta) * fm::ln(fm::sin(theta));
        fm::exp((1.0 - beta) / beta * (ln_a - fm::ln(e)))
    }

    /// Sibuya(beta) draw, `beta` in (0, 1): the positive-integer law with
    /// survival `P[W > n] = Γ(n+1-β) / (Γ(1-β) Γ(n+1))`, inverted by binary
    /// search on the log-gamma form. Values above 2^53 lose integer
    /// resolution, which is immaterial downstream (the frailty only enters
    /// through `E/W`).
    pub fn sibuya(&mut self, beta: f64) -> f64 {
        debug_assert!(beta > 0.0 && beta < 1.0);
        let target = self.uniform();
        let lg1mb = fm::lgamma(1.0 - beta);
        let survival = |n: f64| fm::exp(fm::lgamma(n + 1.0 - beta) - lg1mb - fm::lgamma(n + 1.0));
        if survival(1.0) <= target {
            return 1.0;
        }
        let mut hi = 2.0;
        while survival(hi) > target && hi < 1e300 {
            hi *= 2.0;
        }
        let mut lo = hi / 2.0;
        // Smallest n with survival(n) <= target.
        for _ in 0..200 {
            if hi - lo <= 1.0 || hi - lo < 1e-9 * hi {
                break;
            }
            let mid = fm::floor(0.5 * (lo + hi));
            if survival(mid) <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Logarithmic-series draw with parameter `p` in (0, 1), Kemp's method.
    pub fn log_series(&mut self, p: f64) -> f64 {
        debug_assert!(p > 0.0 && p < 1.0);
        let r = fm::ln_1p(-p);
        loop {
            let v = self.uniform();
            if v >= p {
                return 1.0;
            }
            let u = self.uniform();
            let q = -fm::exp_m1(r * u);
            if v <= q * q {
                let k = fm::floor(1.0 + fm::ln(v) / fm::ln(q));
                if k >= 1.0 && k.is_finite() {
                    return k;
                }
                continue;
            }
            return if v >= q { 1.0 } else { 2.0 };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(draws: &[f64]) -> (f64, f64) {
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let mut a = RngStream::substream(7, 3);
        let mut b = RngStream::substream(7, 3);
        let mut c = RngStream::substream(7, 4);
        let xa: alloc::vec::Vec<f64> = (0..8).map(|_| a.uniform()).collect();
        let xb: alloc::vec::Vec<f64> = (0..8).map(|_| b.uniform()).collect();
        let xc: alloc::vec::Vec<f64> = (0..8).map(|_| c.uniform()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn uniform_is_open_interval_and_calibrated() {
        let mut rng = RngStream::new(13);
        let draws: alloc::vec::Vec<f64> = (0..100_000).map(|_| rng.uniform()).collect();
        assert!(draws.iter().all(|&u| u > 0.0 && u < 1.0));
        let (mean, var) = moments(&draws);
        assert!((mean - 0.5).abs() < 0.005);
        assert!((var - 1.0 / 12.0).abs() < 0.002);
    }

    #[test]
    fn gamma_matches_moments() {
        for &shape in &[0.4, 1.0, 3.7] {
            let mut rng = RngStream::new(99);
            let draws: alloc::vec::Vec<f64> = (0..200_000).map(|_| rng.gamma(shape)).collect();
            let (mean, var) = moments(&draws);
            assert!((mean - shape).abs() < 0.03 * (1.0 + shape), "shape {shape} mean {mean}");
            assert!((var - shape).abs() < 0.08 * (1.0 + shape), "shape {shape} var {var}");
        }
    }

    #[test]
    fn positive_stable_matches_laplace_transform() {
        // E[exp(-s W)] = exp(-s^beta); check at a few s by Monte Carlo.
        let beta = 0.6;
        let mut rng = RngStream::new(5);
        let draws: alloc::vec::Vec<f64> = (0..200_000).map(|_| rng.positive_stable(beta)).collect();
        for &s in &[0.3, 1.0, 2.5] {
            let emp = draws.iter().map(|&w| fm::exp(-s * w)).sum::<f64>() / draws.len() as f64;
            let expect = fm::exp(-fm::powf(s, beta));
            assert!((emp - expect).abs() < 0.004, "s={s}: {emp} vs {expect}");
        }
    }

    #[test]
    fn sibuya_matches_pmf_head() {
        // P[W = 1] = beta, P[W = 2] = beta(1-beta)/2.
        let beta = 0.45;
        let mut rng = RngStream::new(21);
        let n = 200_000;
        let mut c1 = 0usize;
        let mut c2 = 0usize;
        for _ in 0..n {
            let w = rng.sibuya(beta);
            if w == 1.0 {
                c1 += 1;
            } else if w == 2.0 {
                c2 += 1;
            }
        }
        assert!((c1 as f64 / n as f64 - beta).abs() < 0.005);
        assert!((c2 as f64 / n as f64 - beta * (1.0 - beta) / 2.0).abs() < 0.005);
    }

    #[test]
    fn log_series_matches_pmf_head() {
        // P[W = k] = -p^k / (k ln(1-p)).
        let p = 0.8;
        let mut rng = RngStream::new(33);
        let n = 200_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            let w = rng.log_series(p);
            if w <= 3.0 {
                counts[w as usize - 1] += 1;
            }
        }
        let norm = -fm::ln_1p(-p);
        for (k, &c) in counts.iter().enumerate() {
            let k1 = (k + 1) as f64;
            let expect = fm::powf(p, k1) / (k1 * norm);
            assert!((c as f64 / n as f64 - expect).abs() < 0.005, "k={}", k + 1);
        }
    }
}
