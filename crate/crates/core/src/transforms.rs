//! Dataset transforms.
//!
//! * Shared permutation: one index permutation applied to every train and
//!   test instance. Coordinate-wise (tabular) information survives; the
//!   ordering of points inside every subsequence does not.
//! * Random-walk padding: each z-normalized instance gets a Gaussian random
//!   walk prepended and appended, with a random split of a fixed padding
//!   budget between head and tail. This misaligns the instances while the
//!   original series stays intact as a contiguous window.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{seed_from_fields, Prng};
use crate::series::{LabeledInstance, SplitDataset, TimeSeries};

/// Step standard deviation of the padding walk.
pub const DEFAULT_SIGMA: f64 = 0.01;

/// A permutation of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PermutationIndex(Vec<usize>);

impl PermutationIndex {
    /// Validates that `indices` contains each of `0..len` exactly once.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; indices.len()];
        for &i in &indices {
            if i >= indices.len() || std::mem::replace(&mut seen[i], true) {
                return invalid(format!("not a permutation: index {i} repeated or out of range"));
            }
        }
        Ok(Self(indices))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `out[k] = values[self[k]]`.
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        self.0.iter().map(|&k| values[k]).collect()
    }
}

/// Fisher-Yates shuffle of `0..n` drawn from `Prng::new(seed)`.
pub fn make_permutation(n: usize, seed: u64) -> Result<PermutationIndex> {
    if n < 2 {
        return invalid(format!("make_permutation: n must be >= 2, got {n}"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    Prng::new(seed).shuffle(&mut idx);
    Ok(PermutationIndex(idx))
}

/// Reorders every instance of both splits with the same index.
pub fn apply_shared_permutation(
    dataset: &SplitDataset,
    perm: &PermutationIndex,
) -> Result<SplitDataset> {
    if perm.len() != dataset.series_length {
        return invalid(format!(
            "permutation length {} does not match series length {}",
            perm.len(),
            dataset.series_length
        ));
    }
    dataset.map_series(|s| TimeSeries::new(perm.apply(s.values())))
}

/// Parameters of the padding augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentSpec {
    /// Total padding as a fraction of the series length.
    pub l_fraction: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub seed: u64,
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

impl AugmentSpec {
    pub fn new(l_fraction: f64, seed: u64) -> Self {
        Self {
            l_fraction,
            sigma: DEFAULT_SIGMA,
            seed,
        }
    }

    /// Total padding for a series of length `n`: `round(l_fraction * n)`,
    /// halves rounded away from zero.
    pub fn padding_length(&self, n: usize) -> Result<usize> {
        if !(self.l_fraction > 0.0 && self.l_fraction <= 1.0) && self.l_fraction != 0.0 {
            return invalid(format!(
                "l_fraction must be in (0, 1], got {}",
                self.l_fraction
            ));
        }
        if !(self.sigma >= 0.0) {
            return invalid(format!("sigma must be >= 0, got {}", self.sigma));
        }
        let l = (self.l_fraction * n as f64).round() as usize;
        if self.l_fraction > 0.0 && l == 0 {
            // A positive fraction always pads by at least one point.
            return Ok(1);
        }
        Ok(l)
    }
}

/// Head/tail padding lengths of one augmented instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaddingRecord {
    pub n_h: usize,
    pub n_t: usize,
}

/// Padding records for every instance of an augmented dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentRecord {
    pub l: usize,
    pub train: Vec<PaddingRecord>,
    pub test: Vec<PaddingRecord>,
}

/// Gaussian random walk `p_1..p_length` started from `p_0 = anchor`.
///
/// `p_0` seeds the walk and is not part of the output.
pub fn random_walk_pad(anchor: f64, length: usize, sigma: f64, rng: &mut Prng) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(length);
    let mut prev = anchor;
    for _ in 0..length {
        prev = rng.next_gaussian(prev, sigma)?;
        out.push(prev);
    }
    Ok(out)
}

/// Pads `series` with a total of `l` walk points split uniformly at random
/// between head and tail.
///
/// The head walk starts at the first value and is reversed before being
/// prepended, so both walks meet the series at its endpoints. The input is
/// expected to be z-normalized already; the output is not re-normalized.
pub fn augment_instance(
    series: &TimeSeries,
    l: usize,
    sigma: f64,
    rng: &mut Prng,
) -> Result<(TimeSeries, PaddingRecord)> {
    let values = series.values();
    let n_h = rng.next_index(l);
    let n_t = l - n_h;
    let mut head = random_walk_pad(values[0], n_h, sigma, rng)?;
    head.reverse();
    let tail = random_walk_pad(values[values.len() - 1], n_t, sigma, rng)?;

    let mut out = head;
    out.reserve(values.len() + n_t);
    out.extend_from_slice(values);
    out.extend(tail);
    Ok((TimeSeries::new(out)?, PaddingRecord { n_h, n_t }))
}

/// Seed of the padding stream for one instance.
pub fn instance_seed(seed: u64, split: &str, index: usize) -> u64 {
    seed_from_fields(&[seed.to_string().as_str(), "augment", split, &index.to_string()])
}

/// Augments every instance of both splits, each from its own sub-stream.
pub fn augment_dataset(
    dataset: &SplitDataset,
    spec: &AugmentSpec,
) -> Result<(SplitDataset, AugmentRecord)> {
    let l = spec.padding_length(dataset.series_length)?;
    let augment_split = |split: &str,
                         xs: &[LabeledInstance]|
     -> Result<(Vec<LabeledInstance>, Vec<PaddingRecord>)> {
        let mut instances = Vec::with_capacity(xs.len());
        let mut records = Vec::with_capacity(xs.len());
        for (i, inst) in xs.iter().enumerate() {
            let mut rng = Prng::new(instance_seed(spec.seed, split, i));
            let (series, rec) = augment_instance(&inst.series, l, spec.sigma, &mut rng)?;
            instances.push(LabeledInstance::new(series, inst.label));
            records.push(rec);
        }
        Ok((instances, records))
    };
    let (train, train_rec) = augment_split("train", &dataset.train)?;
    let (test, test_rec) = augment_split("test", &dataset.test)?;
    let ds = SplitDataset::new(
        dataset.name.clone(),
        train,
        test,
        dataset.class_names.clone(),
    )?;
    Ok((
        ds,
        AugmentRecord {
            l,
            train: train_rec,
            test: test_rec,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    fn toy() -> SplitDataset {
        let inst = |v: &[f64], l| LabeledInstance::new(ts(v), l);
        SplitDataset::new(
            "toy",
            vec![inst(&[1.0, 2.0, 3.0], 0), inst(&[3.0, 2.0, 1.0], 1)],
            vec![inst(&[0.5, 0.0, -0.5], 0)],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn permutation_examples() {
        assert!(make_permutation(1, 3).is_err());
        assert_eq!(make_permutation(8, 7).unwrap(), make_permutation(8, 7).unwrap());
        let perm = PermutationIndex::new(vec![2, 0, 1]).unwrap();
        assert_eq!(perm.apply(&[1.0, 2.0, 3.0]), vec![3.0, 1.0, 2.0]);
        assert!(PermutationIndex::new(vec![0, 0, 1]).is_err());
        assert!(PermutationIndex::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn shared_permutation_reorders_both_splits() {
        let ds = toy();
        assert_eq!(apply_shared_permutation(&ds, &PermutationIndex::identity(3)).unwrap(), ds);
        let perm = PermutationIndex::new(vec![2, 0, 1]).unwrap();
        let out = apply_shared_permutation(&ds, &perm).unwrap();
        assert_eq!(out.train[0].series.values(), &[3.0, 1.0, 2.0]);
        assert_eq!(out.train[1].series.values(), &[1.0, 3.0, 2.0]);
        assert_eq!(out.test[0].series.values(), &[-0.5, 0.5, 0.0]);
        assert_eq!(out.train_labels(), ds.train_labels());
        assert!(apply_shared_permutation(&ds, &PermutationIndex::identity(4)).is_err());
    }

    #[test]
    fn walk_edge_cases() {
        let mut rng = Prng::new(1);
        assert!(random_walk_pad(0.3, 0, 0.01, &mut rng).unwrap().is_empty());
        assert_eq!(random_walk_pad(0.3, 5, 0.0, &mut rng).unwrap(), vec![0.3; 5]);
        assert!(random_walk_pad(0.3, 5, -1.0, &mut rng).is_err());
    }

    #[test]
    fn walk_step_distribution() {
        let mut rng = Prng::new(99);
        let walk = random_walk_pad(0.0, 10_000, 0.01, &mut rng).unwrap();
        let mut steps = vec![walk[0]];
        steps.extend(walk.windows(2).map(|w| w[1] - w[0]));
        let n = steps.len() as f64;
        let mean = steps.iter().sum::<f64>() / n;
        let sd = (steps.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!(mean.abs() < 0.0005, "mean {mean}");
        assert!((sd - 0.01).abs() < 0.001, "sd {sd}");
    }

    #[test]
    fn augment_examples() {
        let x = ts(&[0.4, -1.0, 2.0, 0.7]);
        let mut rng = Prng::new(5);
        let (same, rec) = augment_instance(&x, 0, 0.01, &mut rng).unwrap();
        assert_eq!(same, x);
        assert_eq!(rec, PaddingRecord { n_h: 0, n_t: 0 });

        // zero-variance walk: head repeats x_0, tail repeats x_{n-1}
        for seed in 0..50 {
            let mut rng = Prng::new(seed);
            let (out, rec) = augment_instance(&x, 6, 0.0, &mut rng).unwrap();
            let v = out.values();
            assert_eq!(v.len(), 10);
            assert!(v[..rec.n_h].iter().all(|&p| p == 0.4));
            assert_eq!(&v[rec.n_h..rec.n_h + 4], x.values());
            assert!(v[rec.n_h + 4..].iter().all(|&p| p == 0.7));
            if rec.n_h == 2 {
                assert_eq!(&v[..4], &[0.4, 0.4, 0.4, -1.0]);
            }
        }
    }

    #[test]
    fn padding_length_rounding() {
        assert_eq!(AugmentSpec::new(0.2, 0).padding_length(100).unwrap(), 20);
        assert_eq!(AugmentSpec::new(0.25, 0).padding_length(10).unwrap(), 3);
        assert_eq!(AugmentSpec::new(0.0, 0).padding_length(10).unwrap(), 0);
        assert_eq!(AugmentSpec::new(0.01, 0).padding_length(10).unwrap(), 1);
        assert!(AugmentSpec::new(1.5, 0).padding_length(10).is_err());
        assert!(AugmentSpec::new(-0.1, 0).padding_length(10).is_err());
    }

    #[test]
    fn augment_dataset_contract() {
        let ds = toy();
        let (unchanged, rec) = augment_dataset(&ds, &AugmentSpec::new(0.0, 1)).unwrap();
        assert_eq!(unchanged, ds);
        assert_eq!(rec.l, 0);

        let spec = AugmentSpec::new(1.0, 11);
        let (a, rec) = augment_dataset(&ds, &spec).unwrap();
        let (b, _) = augment_dataset(&ds, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.series_length, 6);
        for (orig, (aug, r)) in ds.train.iter().zip(a.train.iter().zip(&rec.train)) {
            assert_eq!(r.n_h + r.n_t, 3);
            assert_eq!(&aug.series.values()[r.n_h..r.n_h + 3], orig.series.values());
            assert_eq!(aug.label, orig.label);
        }
    }

    proptest! {
        #[test]
        fn augmentation_contains_original(
            v in prop::collection::vec(-3.0f64..3.0, 2..40),
            l in 0usize..30,
            seed in any::<u64>(),
        ) {
            let x = ts(&v);
            let mut rng = Prng::new(seed);
            let (out, rec) = augment_instance(&x, l, 0.01, &mut rng).unwrap();
            prop_assert_eq!(out.len(), v.len() + l);
            prop_assert_eq!(rec.n_h + rec.n_t, l);
            prop_assert_eq!(&out.values()[rec.n_h..rec.n_h + v.len()], &v[..]);
        }

        #[test]
        fn permutation_preserves_multiset(n in 2usize..50, seed in any::<u64>()) {
            let perm = make_permutation(n, seed).unwrap();
            let mut idx = perm.indices().to_vec();
            idx.sort();
            prop_assert_eq!(idx, (0..n).collect::<Vec<_>>());
        }
    }
}
