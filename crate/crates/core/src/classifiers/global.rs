//! Eight whole-series summary statistics.

use crate::error::{invalid, Result};
use crate::series::ZERO_VARIANCE_EPS;

use super::features::FeatureMatrix;
use super::interval::ols_slope;

pub const GLOBAL_FEATURE_COUNT: usize = 8;

fn autocorrelation(centered: &[f64], lag: usize, denom: f64) -> f64 {
    centered
        .iter()
        .zip(&centered[lag..])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / denom
}

/// Mean, population std, skewness, lag-1 and lag-2 autocorrelation,
/// mean-crossing rate, longest run above the mean (as a fraction of `n`),
/// and OLS slope.
///
/// Series whose variance is below `1e-12` return the mean followed by
/// seven zeros.
pub fn global_features(x: &[f64]) -> Result<[f64; GLOBAL_FEATURE_COUNT]> {
    let n = x.len();
    if n < 4 {
        return invalid(format!("global features need n >= 4, got {n}"));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let m2 = centered.iter().map(|c| c * c).sum::<f64>() / nf;
    if m2 < ZERO_VARIANCE_EPS {
        return Ok([mean, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }
    let m3 = centered.iter().map(|c| c * c * c).sum::<f64>() / nf;
    let skew = m3 / m2.powf(1.5);
    let ss = m2 * nf;
    let ac1 = autocorrelation(&centered, 1, ss);
    let ac2 = autocorrelation(&centered, 2, ss);
    let crossings = centered.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    let mut longest = 0usize;
    let mut run = 0usize;
    for c in &centered {
        if *c > 0.0 {
            run += 1;
            longest = longest.max(run);
        } else {
            run = 0;
        }
    }
    Ok([
        mean,
        m2.sqrt(),
        skew,
        ac1,
        ac2,
        crossings as f64 / (nf - 1.0),
        longest as f64 / nf,
        ols_slope(x),
    ])
}

pub fn global_feature_matrix(series: &[&[f64]]) -> Result<FeatureMatrix> {
    let rows = series
        .iter()
        .map(|x| global_features(x).map(|f| f.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::from_rows(rows)
}
