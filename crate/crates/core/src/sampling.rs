//! Seeded random streams.
//!
//! Generator: ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `SeedableRng::seed_from_u64`. Standard normals use the ziggurat sampler
//! from `rand_distr::StandardNormal`; uniforms on `[0, 1)` use the 53-bit
//! multiply construction from `rand`. All three are fixed algorithms, not
//! platform defaults, so recorded outputs stay reproducible.
//!
//! Parallel campaigns never share a stream. Each trial gets its own stream
//! from [`derive_trial_seed`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// `mean + sqrt(variance)·z`. Always consumes exactly one normal draw,
    /// including when `variance == 0`.
    #[inline]
    pub fn gaussian(&mut self, mean: f64, variance: f64) -> Result<f64> {
        gaussian_draw(mean, variance, self)
    }
}

pub fn gaussian_draw(mean: f64, variance: f64, stream: &mut RandomStream) -> Result<f64> {
    if !(variance >= 0.0) {
        return Err(Error::invalid(format!(
            "variance must be >= 0, got {variance}"
        )));
    }
    let z = stream.standard_normal();
    if variance == 0.0 {
        return Ok(mean);
    }
    Ok(mean + variance.sqrt() * z)
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. A bijection on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial_index` of a campaign seeded with `master_seed`.
///
/// This is the SplitMix64 output at position `trial_index + 1` of the
/// sequence started at `master_seed`. The state `master + (i+1)·γ` is
/// injective in `i` modulo 2^64 because γ is odd, and the finalizer is a
/// bijection, so distinct indices always give distinct seeds.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    mix64(master_seed.wrapping_add(trial_index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn zero_variance_returns_mean() {
        let mut s = RandomStream::new(99);
        assert_eq!(gaussian_draw(5.0, 0.0, &mut s).unwrap(), 5.0);
    }

    #[test]
    fn negative_variance_rejected() {
        let mut s = RandomStream::new(1);
        assert!(matches!(
            gaussian_draw(0.0, -1e-9, &mut s),
            Err(Error::InvalidArgument(_))
        ));
        assert!(gaussian_draw(0.0, f64::NAN, &mut s).is_err());
    }

    fn sample_mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn standard_normal_moments() {
        let mut s = RandomStream::new(2024);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| gaussian_draw(0.0, 1.0, &mut s).unwrap())
            .collect();
        let (mean, _) = sample_mean_var(&xs);
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn scaled_normal_variance() {
        let mut s = RandomStream::new(7);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| gaussian_draw(0.0, 4.0, &mut s).unwrap())
            .collect();
        let (_, var) = sample_mean_var(&xs);
        assert!((var - 4.0).abs() < 0.2, "var {var}");
    }

    #[test]
    fn replay_is_bit_exact() {
        let mut a = RandomStream::new(31337);
        let mut b = RandomStream::new(31337);
        for _ in 0..1000 {
            assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn location_scale() {
        let mut a = RandomStream::new(5);
        let mut b = RandomStream::new(5);
        for _ in 0..1000 {
            let x = gaussian_draw(3.0, 2.5, &mut a).unwrap();
            let z = gaussian_draw(0.0, 1.0, &mut b).unwrap();
            assert_eq!(x, 3.0 + 2.5f64.sqrt() * z);
        }
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut s = RandomStream::new(0);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn trial_seeds_deterministic_and_distinct() {
        assert_eq!(derive_trial_seed(42, 3), derive_trial_seed(42, 3));
        assert_ne!(derive_trial_seed(42, 0), derive_trial_seed(42, 1));
        let seeds: HashSet<u64> = (0..10_000).map(|i| derive_trial_seed(42, i)).collect();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn trial_seeds_distinct_over_a_million_indices() {
        let seeds: HashSet<u64> = (0..1_000_000)
            .map(|i| derive_trial_seed(0xDEAD_BEEF, i))
            .collect();
        assert_eq!(seeds.len(), 1_000_000);
    }
}
