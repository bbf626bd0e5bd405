//! Squared Euclidean and banded DTW distances, and 1-nearest-neighbour.

use crate::error::{invalid, Result};

/// Distance used by [`nn1`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Euclidean,
    /// DTW with a Sakoe-Chiba band given as a fraction of the longer length.
    Dtw { band: f64 },
}

/// Sum of squared differences. No square root: monotone-equivalent for
/// nearest-neighbour search.
pub fn squared_euclidean(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Half-width of the warping band for lengths `n`, `m` and fraction `band`.
pub fn band_width(n: usize, m: usize, band: f64) -> usize {
    (band * n.max(m) as f64).ceil() as usize
}

/// Dynamic time warping with squared point costs.
///
/// `D(i,j) = c(i,j) + min(D(i-1,j), D(i,j-1), D(i-1,j-1))`, cells with
/// `|i - j|` beyond `ceil(band * max(n, m))` excluded. The returned value is
/// `D(n,m)` without a square root; `band = 1` is unconstrained.
///
/// The cost accumulated along any path is `c_k + (... + (c_2 + c_1))`, so the
/// result is bit-identical to the minimum over all admissible warping paths
/// of their left-to-right cost sums.
pub fn dtw_distance(x: &[f64], y: &[f64], band: f64) -> Result<f64> {
    dtw_bounded(x, y, band, f64::INFINITY)
}

/// As [`dtw_distance`], but returns `+inf` as soon as every cell of a row
/// exceeds `cutoff`. Used to prune nearest-neighbour scans.
pub(crate) fn dtw_bounded(x: &[f64], y: &[f64], band: f64, cutoff: f64) -> Result<f64> {
    let (n, m) = (x.len(), y.len());
    if n == 0 || m == 0 {
        return invalid("dtw_distance: empty series");
    }
    if !(band > 0.0 && band <= 1.0) {
        return invalid(format!("dtw_distance: band must be in (0, 1], got {band}"));
    }
    let w = band_width(n, m, band);
    if n.abs_diff(m) > w {
        return invalid(format!(
            "dtw_distance: band {w} too narrow for lengths {n} and {m}"
        ));
    }

    let inf = f64::INFINITY;
    let mut prev = vec![inf; m + 1];
    let mut curr = vec![inf; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        curr.iter_mut().for_each(|c| *c = inf);
        let lo = i.saturating_sub(w).max(1);
        let hi = (i + w).min(m);
        let mut row_min = inf;
        for j in lo..=hi {
            let d = x[i - 1] - y[j - 1];
            let best = prev[j].min(curr[j - 1]).min(prev[j - 1]);
            let v = d * d + best;
            curr[j] = v;
            row_min = row_min.min(v);
        }
        if row_min > cutoff {
            return Ok(inf);
        }
        std::mem::swap(&mut prev, &mut curr);
        // only the (0,0) cell seeds the first row
        prev[0] = inf;
    }
    Ok(prev[m])
}

/// Index of the nearest training series; ties go to the smallest index.
fn nearest(train: &[&[f64]], query: &[f64], metric: Metric) -> Result<usize> {
    let mut best = f64::INFINITY;
    let mut best_idx = 0;
    for (k, t) in train.iter().enumerate() {
        let d = match metric {
            Metric::Euclidean => squared_euclidean(t, query),
            Metric::Dtw { band } => dtw_bounded(t, query, band, best)?,
        };
        if d < best || k == 0 && d == best {
            best = d;
            best_idx = k;
        }
    }
    Ok(best_idx)
}

/// Labels each query with the label of its nearest training series.
pub fn nn1(
    metric: Metric,
    train: &[&[f64]],
    train_labels: &[usize],
    test: &[&[f64]],
) -> Result<Vec<usize>> {
    if train.is_empty() || train.len() != train_labels.len() {
        return invalid("nn1: training set empty or label count mismatch");
    }
    test.iter()
        .map(|q| nearest(train, q, metric).map(|k| train_labels[k]))
        .collect()
}
