//! Wilcoxon signed-rank test.
//!
//! Zero differences are dropped. Absolute differences are ranked with
//! average ranks for ties. With at most [`EXACT_MAX_N`] non-zero differences
//! the null distribution of `W+` is computed exactly over all `2^n` sign
//! assignments of the observed rank multiset; above that a tie-corrected
//! normal approximation with continuity correction is used.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result};

/// Largest effective sample size handled by exact enumeration.
pub const EXACT_MAX_N: usize = 20;

/// Differences (and gaps between absolute differences) at or below this are
/// treated as zero / tied. Accuracies are ratios of counts, and their float
/// differences pick up rounding noise well below this.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// `a` tends to be larger than `b`.
    AGreater,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: usize,
    pub method: Method,
    pub degenerate: bool,
}

/// Non-zero differences and their average ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedRanks {
    pub differences: Vec<f64>,
    pub ranks: Vec<f64>,
}

impl SignedRanks {
    pub fn new(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return invalid(format!(
                "paired samples differ in length: {} vs {}",
                a.len(),
                b.len()
            ));
        }
        if a.is_empty() {
            return invalid("paired samples are empty");
        }
        let differences: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(x, y)| x - y)
            .filter(|d| d.abs() > TIE_TOLERANCE)
            .collect();
        let ranks = average_ranks(&differences.iter().map(|d| d.abs()).collect::<Vec<_>>());
        Ok(Self { differences, ranks })
    }

    pub fn n(&self) -> usize {
        self.differences.len()
    }

    /// Sum of the ranks of positive differences.
    pub fn w_plus(&self) -> f64 {
        self.differences
            .iter()
            .zip(&self.ranks)
            .filter(|(d, _)| **d > 0.0)
            .map(|(_, r)| r)
            .sum()
    }

    /// Sizes of the tie groups among the absolute differences.
    pub fn tie_groups(&self) -> Vec<usize> {
        let mut sorted = self.ranks.clone();
        sorted.sort_by(f64::total_cmp);
        let mut groups = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let j = sorted[i..].iter().take_while(|&&r| r == sorted[i]).count();
            groups.push(j);
            i += j;
        }
        groups
    }
}

/// Ascending average ranks (1-based); values within [`TIE_TOLERANCE`] of
/// their sorted neighbour share a rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] - values[order[j - 1]] <= TIE_TOLERANCE {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        i = j;
    }
    ranks
}

/// Exact null distribution of `2 W+` as counts over all sign assignments.
///
/// Average ranks are multiples of 1/2, so doubled ranks are integers and the
/// distribution is a subset-sum count over them.
fn exact_counts(ranks: &[f64]) -> Vec<u64> {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for d in doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + d] += counts[s];
            }
        }
        reach += d;
    }
    counts
}

/// `P(W+ >= w)` and `P(W+ <= w)` under the exact null.
pub fn exact_tails(ranks: &[f64], w_plus: f64) -> (f64, f64) {
    let counts = exact_counts(ranks);
    let obs = (w_plus * 2.0).round() as usize;
    let denom = 2f64.powi(ranks.len() as i32);
    let upper: u64 = counts[obs.min(counts.len())..].iter().sum();
    let lower: u64 = counts[..=obs.min(counts.len() - 1)].iter().sum();
    (upper as f64 / denom, lower as f64 / denom)
}

fn normal_tails(sr: &SignedRanks, w_plus: f64) -> (f64, f64) {
    let n = sr.n() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = sr
        .tie_groups()
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    let sd = var.sqrt();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let upper = std_normal.sf((w_plus - mean - 0.5) / sd);
    let lower = std_normal.cdf((w_plus - mean + 0.5) / sd);
    (upper, lower)
}

/// Signed-rank test of the paired samples `a` and `b` (`d = a - b`).
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], alternative: Alternative) -> Result<WilcoxonResult> {
    let sr = SignedRanks::new(a, b)?;
    let n = sr.n();
    if n == 0 {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            n_effective: 0,
            method: Method::Exact,
            degenerate: true,
        });
    }
    let w = sr.w_plus();
    let (method, (upper, lower)) = if n <= EXACT_MAX_N {
        (Method::Exact, exact_tails(&sr.ranks, w))
    } else {
        (Method::NormalApprox, normal_tails(&sr, w))
    };
    let p = match alternative {
        Alternative::AGreater => upper,
        Alternative::TwoSided => (2.0 * upper.min(lower)).min(1.0),
    };
    Ok(WilcoxonResult {
        statistic: w,
        p_value: p.clamp(f64::MIN_POSITIVE, 1.0),
        n_effective: n,
        method,
        degenerate: false,
    })
}

/// Normal-approximation p-value regardless of sample size. Exposed so the
/// exact path can be used as its oracle.
pub fn wilcoxon_normal_approx(a: &[f64], b: &[f64], alternative: Alternative) -> Result<f64> {
    let sr = SignedRanks::new(a, b)?;
    if sr.n() == 0 {
        return Ok(1.0);
    }
    let (upper, lower) = normal_tails(&sr, sr.w_plus());
    Ok(match alternative {
        Alternative::AGreater => upper,
        Alternative::TwoSided => (2.0 * upper.min(lower)).min(1.0),
    })
}
