//! Reproducible random streams.
//!
//! Every stochastic step in the toolkit draws from a [`Stream`], which is a
//! xoshiro256** generator whose 256-bit state is filled from a 64-bit seed
//! by SplitMix64. Seeds for independent sub-tasks come from [`derive_seed`].
//! The conversions below are part of the public contract so that bindings in
//! other languages reproduce the same numbers bit for bit:
//!
//! * uniform `[0, 1)`: `(next_u64() >> 11) * 2^-53`
//! * integer below `n`: Lemire's multiply-high method with rejection
//! * standard normal: Marsaglia polar method on `v = 2u - 1` pairs, both
//!   deviates of an accepted pair are used (first, then the cached second)

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer (Stafford variant 13).
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-task `index` under `master`:
/// `mix64(master ^ (index + 1) * 0x9E3779B97F4A7C15)` with wrapping arithmetic.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA))
}

/// A seeded pseudo-random stream with the frozen conversions listed above.
#[derive(Debug, Clone)]
pub struct Stream {
    inner: Xoshiro256StarStar,
    spare_normal: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the half-open interval `[low, high)`.
    pub fn uniform_in(&mut self, low: f64, high: f64) -> f64 {
        let x = low + (high - low) * self.uniform();
        // low + w*u can round up to high when u is close to 1
        if x >= high {
            high.next_down()
        } else {
            x
        }
    }

    /// Unbiased integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        loop {
            let v1 = 2.0 * self.uniform() - 1.0;
            let v2 = 2.0 * self.uniform() - 1.0;
            let s = v1 * v1 + v2 * v2;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v2 * factor);
                return v1 * factor;
            }
        }
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }

    /// Fisher-Yates shuffle, iterating from the last position down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn adjacent_indices_differ() {
        let s = 12345;
        assert_ne!(derive_seed(s, 0), derive_seed(s, 1));
        assert_eq!(derive_seed(s, 7), derive_seed(s, 7));
    }

    #[test]
    fn thousand_indices_do_not_collide() {
        let seen: HashSet<u64> = (0..1000)
            .map(|i| derive_seed(0x9E37_79B9_7F4A_7C15, i))
            .collect();
        assert_eq!(seen.len(), 1000);
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0,
        // i.e. mix64(k * gamma) for k = 1, 2, 3.
        assert_eq!(mix64(GOLDEN_GAMMA), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(GOLDEN_GAMMA.wrapping_mul(2)), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(mix64(GOLDEN_GAMMA.wrapping_mul(3)), 0x06C4_5D18_8009_454F);
        assert_eq!(derive_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn uniform_stays_in_unit_interval() {
        let mut rng = Stream::new(1);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn uniform_in_never_returns_high() {
        let mut rng = Stream::new(3);
        let (lo, hi) = (1.0, 1.0 + f64::EPSILON);
        for _ in 0..1000 {
            let x = rng.uniform_in(lo, hi);
            assert!(x >= lo && x < hi);
        }
    }

    #[test]
    fn below_is_roughly_uniform() {
        let mut rng = Stream::new(9);
        let mut counts = [0usize; 6];
        for _ in 0..60_000 {
            counts[rng.below(6) as usize] += 1;
        }
        for c in counts {
            assert!((9_500..10_500).contains(&c), "{counts:?}");
        }
    }

    #[test]
    fn normal_moments() {
        let mut rng = Stream::new(77);
        let n = 200_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn streams_are_reproducible() {
        let mut a = Stream::new(5);
        let mut b = Stream::new(5);
        for _ in 0..100 {
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = Stream::new(11);
        let mut v: Vec<usize> = (0..50).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_ne!(v, sorted);
    }
}
