//! Random shapelet candidates scored by information gain.
//!
//! A shapelet is a z-normalized subsequence of a training series. Its
//! feature value for a series is the smallest length-normalized squared
//! distance to any z-normalized window of that series, so the position of
//! the best match does not matter.

use crate::error::{invalid, Result};
use crate::rng::Prng;
use crate::series::z_normalize_into;

use super::features::FeatureMatrix;

pub const DEFAULT_CANDIDATES: usize = 200;
pub const DEFAULT_KEEP: usize = 20;
pub const MIN_SERIES_LENGTH: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Shapelet {
    pub values: Vec<f64>,
    /// Training instance and start the candidate was cut from.
    pub source: usize,
    pub start: usize,
    pub gain: f64,
}

/// `min_z dist(znorm(window), shapelet) / w` over all windows of `series`.
///
/// Windows with zero variance normalize to the zero vector.
pub fn shapelet_min_distance(shapelet: &[f64], series: &[f64]) -> Result<f64> {
    let w = shapelet.len();
    if w == 0 || w > series.len() {
        return invalid(format!(
            "shapelet length {w} must be in 1..={}",
            series.len()
        ));
    }
    let mut buf = vec![0.0; w];
    Ok(min_distance_with(shapelet, series, &mut buf))
}

fn min_distance_with(shapelet: &[f64], series: &[f64], buf: &mut [f64]) -> f64 {
    let w = shapelet.len();
    let mut best = f64::INFINITY;
    for window in series.windows(w) {
        z_normalize_into(window, buf);
        let mut acc = 0.0;
        for (a, b) in buf.iter().zip(shapelet) {
            acc += (a - b) * (a - b);
            if acc >= best {
                break;
            }
        }
        best = best.min(acc);
    }
    best / w as f64
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

/// Best split of `distances` by a threshold, in bits.
///
/// Candidate thresholds sit at midpoints of consecutive distinct sorted
/// distances; values `<=` the threshold go left. Returns
/// `(threshold, gain)`, or `(NaN, 0)` when every distance is equal.
pub fn best_information_gain(distances: &[f64], labels: &[usize], n_classes: usize) -> (f64, f64) {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));

    let total = distances.len();
    let mut right = vec![0usize; n_classes];
    labels.iter().for_each(|&l| right[l] += 1);
    let parent = entropy(&right, total);
    let mut left = vec![0usize; n_classes];

    let (mut best_thr, mut best_gain) = (f64::NAN, 0.0);
    for k in 0..total.saturating_sub(1) {
        let i = order[k];
        left[labels[i]] += 1;
        right[labels[i]] -= 1;
        let (here, next) = (distances[i], distances[order[k + 1]]);
        if here == next {
            continue;
        }
        let nl = k + 1;
        let nr = total - nl;
        let gain = parent
            - (nl as f64 / total as f64) * entropy(&left, nl)
            - (nr as f64 / total as f64) * entropy(&right, nr);
        if gain > best_gain || best_thr.is_nan() {
            best_gain = gain;
            best_thr = (here + next) / 2.0;
        }
    }
    (best_thr, best_gain.max(0.0))
}

/// Candidate length range `max(3, floor(0.1 n))..=floor(0.4 n)`.
pub fn candidate_lengths(n: usize) -> Result<(usize, usize)> {
    if n < MIN_SERIES_LENGTH {
        return invalid(format!(
            "shapelets need series of length >= {MIN_SERIES_LENGTH}, got {n}"
        ));
    }
    let lo = (n / 10).max(3);
    let hi = n * 2 / 5;
    if lo > hi {
        return invalid(format!("no feasible shapelet length for n = {n}"));
    }
    Ok((lo, hi))
}

/// Draws `candidates` random shapelets and keeps the `keep` with the
/// highest information gain (ties keep the earlier candidate).
pub fn shapelet_select(
    train: &[&[f64]],
    labels: &[usize],
    n_classes: usize,
    candidates: usize,
    keep: usize,
    rng: &mut Prng,
) -> Result<Vec<Shapelet>> {
    if n_classes < 2 {
        return invalid("shapelet selection needs at least 2 classes");
    }
    if train.is_empty() || train.len() != labels.len() {
        return invalid("shapelet selection: empty training set or label mismatch");
    }
    let n = train[0].len();
    let (lo, hi) = candidate_lengths(n)?;

    let mut scored = Vec::with_capacity(candidates);
    for _ in 0..candidates {
        let source = rng.next_index(train.len() - 1);
        let w = lo + rng.next_index(hi - lo);
        let start = rng.next_index(n - w);
        let mut values = vec![0.0; w];
        z_normalize_into(&train[source][start..start + w], &mut values);

        let mut buf = vec![0.0; w];
        let profile: Vec<f64> = train
            .iter()
            .map(|s| min_distance_with(&values, s, &mut buf))
            .collect();
        let (_, gain) = best_information_gain(&profile, labels, n_classes);
        scored.push(Shapelet {
            values,
            source,
            start,
            gain,
        });
    }
    // stable: equal gains keep candidate order
    scored.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    scored.truncate(keep.min(candidates));
    Ok(scored)
}

pub fn transform(shapelets: &[Shapelet], series: &[&[f64]]) -> Result<FeatureMatrix> {
    FeatureMatrix::from_rows(
        series
            .iter()
            .map(|s| {
                shapelets
                    .iter()
                    .map(|sh| shapelet_min_distance(&sh.values, s))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{z_normalize, TimeSeries};

    fn brute_min_distance(sh: &[f64], s: &[f64]) -> f64 {
        let w = sh.len();
        let mut best = f64::INFINITY;
        for start in 0..=s.len() - w {
            let win = &s[start..start + w];
            let mean = win.iter().sum::<f64>() / w as f64;
            let sd = (win.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / w as f64).sqrt();
            let mut d = 0.0;
            for k in 0..w {
                let z = if sd < 1e-12 { 0.0 } else { (win[k] - mean) / sd };
                d += (z - sh[k]).powi(2);
            }
            best = best.min(d / w as f64);
        }
        best
    }

    #[test]
    fn gain_on_pure_split() {
        let (thr, gain) = best_information_gain(&[1.0, 2.0, 9.0, 10.0], &[0, 0, 1, 1], 2);
        assert_eq!(thr, 5.5);
        assert!((gain - 1.0).abs() < 1e-12);
        let (thr, gain) = best_information_gain(&[3.0; 4], &[0, 1, 0, 1], 2);
        assert!(thr.is_nan());
        assert_eq!(gain, 0.0);
    }

    #[test]
    fn exact_window_match_is_zero() {
        let s: Vec<f64> = (0..30).map(|i| ((i * i) % 7) as f64).collect();
        let win = TimeSeries::new(s[11..17].to_vec()).unwrap();
        let sh = z_normalize(&win).unwrap();
        assert_eq!(shapelet_min_distance(sh.values(), &s).unwrap(), 0.0);
        assert!(shapelet_min_distance(&[0.0; 31], &s).is_err());
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = Prng::new(10);
        for _ in 0..200 {
            let s: Vec<f64> = (0..30).map(|_| rng.standard_normal()).collect();
            let mut raw: Vec<f64> = (0..5).map(|_| rng.standard_normal()).collect();
            if rng.next_uniform() < 0.1 {
                raw = vec![1.0; 5];
            }
            let mut sh = vec![0.0; 5];
            z_normalize_into(&raw, &mut sh);
            let got = shapelet_min_distance(&sh, &s).unwrap();
            assert!((got - brute_min_distance(&sh, &s)).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_training_series_have_no_gain() {
        let x: Vec<f64> = (0..20).map(|i| (i as f64 * 0.4).sin()).collect();
        let train = vec![x.as_slice(); 6];
        let sh = shapelet_select(&train, &[0, 1, 0, 1, 0, 1], 2, 15, 5, &mut Prng::new(1)).unwrap();
        assert_eq!(sh.len(), 5);
        assert!(sh.iter().all(|s| s.gain == 0.0));
        // ties keep candidate order: the first five candidates survive
        let all = shapelet_select(&train, &[0, 1, 0, 1, 0, 1], 2, 15, 15, &mut Prng::new(1)).unwrap();
        assert_eq!(&all[..5], &sh[..]);
    }

    #[test]
    fn selection_shape_and_bounds() {
        let mut rng = Prng::new(6);
        let data: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..40).map(|_| rng.standard_normal()).collect())
            .collect();
        let train: Vec<&[f64]> = data.iter().map(|v| v.as_slice()).collect();
        let labels = [0, 1, 0, 1, 0, 1, 0, 1];
        let sh = shapelet_select(&train, &labels, 2, 7, 20, &mut rng).unwrap();
        assert_eq!(sh.len(), 7);
        for s in &sh {
            assert!((4..=16).contains(&s.values.len()));
            assert!(s.start + s.values.len() <= 40);
        }
        assert!(sh.windows(2).all(|p| p[0].gain >= p[1].gain));
        assert!(candidate_lengths(9).is_err());
        assert!(shapelet_select(&train, &labels, 1, 3, 3, &mut rng).is_err());
    }
}
