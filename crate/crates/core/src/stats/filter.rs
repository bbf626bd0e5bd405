use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Mean and sample standard deviation (divisor `R - 1`) of run accuracies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

impl RunSummary {
    pub fn from_runs(runs: &[f64]) -> Result<Self> {
        if runs.len() < 2 {
            return invalid(format!(
                "need at least 2 runs for a standard deviation, got {}",
                runs.len()
            ));
        }
        let r = runs.len() as f64;
        let mean = runs.iter().sum::<f64>() / r;
        let var = runs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (r - 1.0);
        Ok(Self {
            mean,
            std: var.sqrt(),
            runs: runs.len(),
        })
    }
}

/// Flags a dataset whose permuted accuracy is not meaningfully below the
/// original: either the permuted mean is at least the original mean, or the
/// gap is within `k_std` summed standard deviations.
pub fn filter_verdict(ori: &RunSummary, per: &RunSummary, k_std: f64) -> bool {
    per.mean >= ori.mean || (ori.mean - per.mean).abs() <= k_std * (ori.std + per.std)
}

/// [`filter_verdict`] on raw run accuracies.
pub fn temporal_filter_rule(ori_runs: &[f64], per_runs: &[f64], k_std: f64) -> Result<bool> {
    let ori = RunSummary::from_runs(ori_runs)?;
    let per = RunSummary::from_runs(per_runs)?;
    Ok(filter_verdict(&ori, &per, k_std))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two runs with the given mean and sample std.
    fn runs(mean: f64, std: f64) -> Vec<f64> {
        let d = std / 2f64.sqrt();
        vec![mean - d, mean + d]
    }

    #[test]
    fn worked_examples() {
        assert!(temporal_filter_rule(&runs(0.90, 0.2), &runs(0.92, 0.0), 1.0).unwrap());
        assert!(!temporal_filter_rule(&runs(0.90, 0.01), &runs(0.87, 0.01), 1.0).unwrap());
        assert!(temporal_filter_rule(&runs(0.90, 0.01), &runs(0.87, 0.01), 2.0).unwrap());
        assert!(temporal_filter_rule(&[0.9], &[0.8, 0.7], 1.0).is_err());
    }

    #[test]
    fn sample_std() {
        let s = RunSummary::from_runs(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn monotone_in_k(
            ori in proptest::collection::vec(0.0f64..1.0, 2..6),
            per in proptest::collection::vec(0.0f64..1.0, 2..6),
            k in 0.0f64..3.0,
            extra in 0.0f64..3.0,
        ) {
            if temporal_filter_rule(&ori, &per, k).unwrap() {
                proptest::prop_assert!(temporal_filter_rule(&ori, &per, k + extra).unwrap());
            }
        }
    }
}
