//! Deterministic pseudo-randomness.
//!
//! Every random choice in the toolkit (permutation indices, padding walks,
//! kernel sampling, resampled splits) flows through [`Prng`], a SplitMix64
//! stream. The generator never touches platform entropy, so a seed fully
//! determines the output on every platform and build.

use crate::error::{invalid, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const FIELD_SEPARATOR: u8 = 0x1F;

/// The SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over `bytes`, 64-bit variant.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// Hash a list of textual fields into a seed.
///
/// The fields are joined with the unit separator byte `0x1F`, hashed with
/// FNV-1a 64 and passed once through [`mix64`]. This is the only seed
/// derivation rule in the crate; both the experiment harness and the
/// per-instance augmentation streams use it.
pub fn seed_from_fields<S: AsRef<str>>(fields: &[S]) -> u64 {
    let mut bytes = Vec::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            bytes.push(FIELD_SEPARATOR);
        }
        bytes.extend_from_slice(f.as_ref().as_bytes());
    }
    mix64(fnv1a64(&bytes))
}

/// SplitMix64 stream with Box-Muller gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct Prng {
    state: u64,
    cached_gaussian: Option<f64>,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            cached_gaussian: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` built from the top 53 bits of the next word.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `lo..=hi`.
    ///
    /// Computed as `lo + floor(u * (hi - lo + 1))` from one uniform draw,
    /// without rejection. The bias this leaves is below `2^-53` relative
    /// for any range that fits in the integer domain used here.
    pub fn next_int(&mut self, lo: i64, hi: i64) -> Result<i64> {
        if lo > hi {
            return invalid(format!("next_int: lo ({lo}) > hi ({hi})"));
        }
        let span = (i128::from(hi) - i128::from(lo) + 1) as f64;
        let offset = (self.next_uniform() * span).floor() as i128;
        let v = i128::from(lo) + offset;
        Ok(v.min(i128::from(hi)) as i64)
    }

    /// Uniform index in `0..=hi`. Shorthand for the common unsigned case.
    pub fn next_index(&mut self, hi: usize) -> usize {
        let span = (hi as f64) + 1.0;
        ((self.next_uniform() * span).floor() as usize).min(hi)
    }

    /// Gaussian draw via Box-Muller. Each pair of uniforms yields two
    /// normals; the second is cached and returned by the next call.
    pub fn next_gaussian(&mut self, mu: f64, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) {
            return invalid(format!("next_gaussian: sigma must be >= 0, got {sigma}"));
        }
        Ok(mu + sigma * self.standard_normal())
    }

    pub(crate) fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_gaussian.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_gaussian = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Fisher-Yates, walking from the last index down.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_index(i);
            items.swap(i, j);
        }
    }
}
