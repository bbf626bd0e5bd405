//! Random convolutional kernel features (PPV and max pooling).

use crate::error::{invalid, Result};
use crate::rng::Prng;

use super::features::FeatureMatrix;

pub const DEFAULT_KERNELS: usize = 500;
const KERNEL_LENGTHS: [usize; 3] = [7, 9, 11];
/// Shortest series the sampler accepts.
pub const MIN_SERIES_LENGTH: usize = 12;

/// One dilated convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub dilation: usize,
    pub padding: usize,
}

impl Kernel {
    /// Largest admissible dilation exponent `log2((n-1)/(len-1))`.
    pub fn max_dilation_exponent(n: usize, len: usize) -> f64 {
        ((n - 1) as f64 / (len - 1) as f64).log2()
    }

    /// Samples a kernel for series of length `n`.
    pub fn sample(n: usize, rng: &mut Prng) -> Self {
        let len = KERNEL_LENGTHS[rng.next_index(KERNEL_LENGTHS.len() - 1)];
        let mut weights: Vec<f64> = (0..len).map(|_| rng.standard_normal()).collect();
        let mean = weights.iter().sum::<f64>() / len as f64;
        weights.iter_mut().for_each(|w| *w -= mean);
        let bias = 2.0 * rng.next_uniform() - 1.0;
        let a = rng.next_uniform() * Self::max_dilation_exponent(n, len).max(0.0);
        let dilation = (2f64.powf(a).floor() as usize).max(1);
        let padding = if rng.next_uniform() < 0.5 {
            (len - 1) * dilation / 2
        } else {
            0
        };
        Self {
            weights,
            bias,
            dilation,
            padding,
        }
    }

    /// Convolution output (including the bias) over zero-padded `x`.
    pub fn convolve(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len() as isize;
        let span = ((self.weights.len() - 1) * self.dilation) as isize;
        let pad = self.padding as isize;
        let out_len = n + 2 * pad - span;
        let mut out = Vec::with_capacity(out_len.max(0) as usize);
        for t in 0..out_len {
            let start = t - pad;
            let mut acc = self.bias;
            for (k, w) in self.weights.iter().enumerate() {
                let idx = start + (k * self.dilation) as isize;
                if idx >= 0 && idx < n {
                    acc += w * x[idx as usize];
                }
            }
            out.push(acc);
        }
        out
    }

    /// `(ppv, max)` of the convolution output.
    pub fn pooled(&self, x: &[f64]) -> (f64, f64) {
        let out = self.convolve(x);
        let positive = out.iter().filter(|&&v| v > 0.0).count();
        let max = out.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (positive as f64 / out.len() as f64, max)
    }
}

/// Samples `count` kernels once for series of length `n`.
pub fn sample_kernels(n: usize, count: usize, rng: &mut Prng) -> Result<Vec<Kernel>> {
    if n < MIN_SERIES_LENGTH {
        return invalid(format!(
            "kernel features need series of length >= {MIN_SERIES_LENGTH}, got {n}"
        ));
    }
    Ok((0..count).map(|_| Kernel::sample(n, rng)).collect())
}

/// Two features per kernel and series: PPV then max.
pub fn transform(kernels: &[Kernel], series: &[&[f64]]) -> Result<FeatureMatrix> {
    FeatureMatrix::from_rows(
        series
            .iter()
            .map(|x| {
                kernels
                    .iter()
                    .flat_map(|k| {
                        let (ppv, max) = k.pooled(x);
                        [ppv, max]
                    })
                    .collect()
            })
            .collect(),
    )
}

/// Kernels are drawn once from `rng` and applied identically to both sets.
pub fn kernel_conv_features(
    train: &[&[f64]],
    test: &[&[f64]],
    count: usize,
    rng: &mut Prng,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let n = train.first().map(|s| s.len()).unwrap_or(0);
    let kernels = sample_kernels(n, count, rng)?;
    Ok((transform(&kernels, train)?, transform(&kernels, test)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_pools_to_bias() {
        let mut rng = Prng::new(4);
        for _ in 0..100 {
            let k = Kernel::sample(40, &mut rng);
            let (ppv, max) = k.pooled(&[0.0; 40]);
            assert_eq!(ppv, if k.bias > 0.0 { 1.0 } else { 0.0 });
            assert_eq!(max, k.bias);
        }
    }

    #[test]
    fn ppv_bounds() {
        let k = Kernel {
            weights: vec![1.0, -1.0, 0.0],
            bias: 100.0,
            dilation: 1,
            padding: 0,
        };
        assert_eq!(k.pooled(&[0.5, -0.2, 1.0, 3.0]).0, 1.0);
        let mut rng = Prng::new(8);
        for _ in 0..50 {
            let k = Kernel::sample(30, &mut rng);
            let x: Vec<f64> = (0..30).map(|_| rng.standard_normal()).collect();
            let (ppv, _) = k.pooled(&x);
            assert!((0.0..=1.0).contains(&ppv));
        }
    }

    #[test]
    fn dilation_support() {
        let a = Kernel::max_dilation_exponent(100, 9);
        assert!((a - 3.6294).abs() < 1e-4);
        assert_eq!(2f64.powf(a).floor() as usize, 12);
        let mut rng = Prng::new(17);
        for _ in 0..2_000 {
            let k = Kernel::sample(100, &mut rng);
            let len = k.weights.len();
            assert!(KERNEL_LENGTHS.contains(&len));
            let max_d = 2f64.powf(Kernel::max_dilation_exponent(100, len)).floor() as usize;
            assert!((1..=max_d).contains(&k.dilation));
            assert!((len - 1) * k.dilation <= 99);
            assert!(k.weights.iter().sum::<f64>().abs() < 1e-12);
            assert!(k.bias > -1.0 && k.bias < 1.0);
            assert!(k.padding == 0 || k.padding == (len - 1) * k.dilation / 2);
            assert!(!k.convolve(&[0.0; 100]).is_empty());
        }
    }

    #[test]
    fn kernels_reused_across_sets() {
        let mut rng = Prng::new(2);
        let data: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..20).map(|_| rng.standard_normal()).collect())
            .collect();
        let all: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let (joint, _) = kernel_conv_features(&all, &all[..1], 25, &mut Prng::new(5)).unwrap();
        let (tr, te) = kernel_conv_features(&all[..4], &all[4..], 25, &mut Prng::new(5)).unwrap();
        assert_eq!(tr.cols(), 50);
        for i in 0..4 {
            assert_eq!(joint.row(i), tr.row(i));
        }
        for i in 0..2 {
            assert_eq!(joint.row(4 + i), te.row(i));
        }
    }

    #[test]
    fn short_series_rejected() {
        let x = [0.0; 11];
        assert!(kernel_conv_features(&[&x], &[&x], 3, &mut Prng::new(0)).is_err());
    }
}
