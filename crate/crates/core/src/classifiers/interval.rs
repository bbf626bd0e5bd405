//! Fixed-position interval summaries: mean, standard deviation and slope of
//! the same random intervals in every series.

use crate::error::{invalid, Result};
use crate::rng::Prng;
use crate::series::ZERO_VARIANCE_EPS;

use super::features::FeatureMatrix;

pub const DEFAULT_INTERVALS: usize = 32;
pub const MIN_SERIES_LENGTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: usize,
    pub width: usize,
}

/// Width uniform in `3..=n/2`, start uniform in `0..=n-width`.
pub fn sample_intervals(n: usize, count: usize, rng: &mut Prng) -> Result<Vec<Interval>> {
    if n < MIN_SERIES_LENGTH {
        return invalid(format!(
            "interval features need series of length >= {MIN_SERIES_LENGTH}, got {n}"
        ));
    }
    Ok((0..count)
        .map(|_| {
            let width = 3 + rng.next_index(n / 2 - 3);
            let start = rng.next_index(n - width);
            Interval { start, width }
        })
        .collect())
}

/// OLS slope of `values` against `0..len`.
pub(crate) fn ols_slope(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let t_mean = (n - 1.0) / 2.0;
    let v_mean = values.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, v) in values.iter().enumerate() {
        let dt = t as f64 - t_mean;
        num += dt * (v - v_mean);
        den += dt * dt;
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `(mean, population std, slope)`; degenerate intervals give `(mean, 0, 0)`.
pub fn interval_summary(values: &[f64]) -> [f64; 3] {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if var.sqrt() < ZERO_VARIANCE_EPS {
        return [mean, 0.0, 0.0];
    }
    [mean, var.sqrt(), ols_slope(values)]
}

pub fn transform(intervals: &[Interval], series: &[&[f64]]) -> Result<FeatureMatrix> {
    FeatureMatrix::from_rows(
        series
            .iter()
            .map(|x| {
                intervals
                    .iter()
                    .flat_map(|iv| interval_summary(&x[iv.start..iv.start + iv.width]))
                    .collect()
            })
            .collect(),
    )
}

/// `3 * count` features per series, intervals shared by train and test.
pub fn interval_features(
    train: &[&[f64]],
    test: &[&[f64]],
    count: usize,
    rng: &mut Prng,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    let n = train.first().map(|s| s.len()).unwrap_or(0);
    let intervals = sample_intervals(n, count, rng)?;
    Ok((transform(&intervals, train)?, transform(&intervals, test)?))
}
