//! Data model: series, labeled instances and train/test splits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Standard deviations below this are treated as zero by z-normalization.
pub const ZERO_VARIANCE_EPS: f64 = 1e-12;

/// A finite, real-valued univariate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    /// Wraps `values`, rejecting non-finite entries and empty input.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("time series must contain at least one value");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite value {} at index {i}", values[i]));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    /// Borrow the subsequence starting at `start` with length `len`.
    pub fn subsequence(&self, start: usize, len: usize) -> Result<Subsequence<'_>> {
        Subsequence::new(self, start, len)
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A contiguous window `[start, start + len)` of a parent series, with
/// `len` strictly shorter than the parent.
#[derive(Debug, Clone, Copy)]
pub struct Subsequence<'a> {
    parent: &'a TimeSeries,
    start: usize,
    len: usize,
}

impl<'a> Subsequence<'a> {
    pub fn new(parent: &'a TimeSeries, start: usize, len: usize) -> Result<Self> {
        if len == 0 || len >= parent.len() {
            return invalid(format!(
                "subsequence length {len} must be in 1..{}",
                parent.len()
            ));
        }
        if start > parent.len() - len {
            return invalid(format!(
                "subsequence start {start} exceeds {}",
                parent.len() - len
            ));
        }
        Ok(Self { parent, start, len })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &'a [f64] {
        &self.parent.values()[self.start..self.start + self.len]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub series: TimeSeries,
    /// Interned class index in `0..n_classes`.
    pub label: usize,
}

impl LabeledInstance {
    pub fn new(series: TimeSeries, label: usize) -> Self {
        Self { series, label }
    }
}

/// Named train/test collections of equal-length labeled instances.
///
/// `class_names[k]` is the label text of interned class `k`; it is what
/// gets written back when a dataset is saved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitDataset {
    pub name: String,
    pub train: Vec<LabeledInstance>,
    pub test: Vec<LabeledInstance>,
    pub series_length: usize,
    pub class_names: Vec<String>,
}

impl SplitDataset {
    /// Builds a dataset and checks its invariants.
    pub fn new(
        name: impl Into<String>,
        train: Vec<LabeledInstance>,
        test: Vec<LabeledInstance>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let series_length = train
            .first()
            .or(test.first())
            .map(|i| i.series.len())
            .unwrap_or(0);
        let ds = Self {
            name: name.into(),
            train,
            test,
            series_length,
            class_names,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Checks equal lengths, label range and class coverage of the test split.
    pub fn validate(&self) -> Result<()> {
        if self.train.is_empty() {
            return invalid(format!("dataset {}: empty training split", self.name));
        }
        if self.n_classes() < 2 {
            return invalid(format!(
                "dataset {}: need at least 2 classes, found {}",
                self.name,
                self.n_classes()
            ));
        }
        let mut in_train = vec![false; self.n_classes()];
        for (split, instances) in [("train", &self.train), ("test", &self.test)] {
            for (i, inst) in instances.iter().enumerate() {
                if inst.series.len() != self.series_length {
                    return invalid(format!(
                        "dataset {}: {split}[{i}] has length {}, expected {}",
                        self.name,
                        inst.series.len(),
                        self.series_length
                    ));
                }
                if inst.label >= self.n_classes() {
                    return invalid(format!(
                        "dataset {}: {split}[{i}] label {} out of range",
                        self.name, inst.label
                    ));
                }
                if split == "train" {
                    in_train[inst.label] = true;
                }
            }
        }
        if let Some(inst) = self.test.iter().find(|i| !in_train[i.label]) {
            return invalid(format!(
                "dataset {}: test class {} never appears in train",
                self.name, self.class_names[inst.label]
            ));
        }
        Ok(())
    }

    /// Returns a copy with every series replaced by `f(series)`.
    pub fn map_series<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&TimeSeries) -> Result<TimeSeries>,
    {
        let mut map = |xs: &[LabeledInstance]| -> Result<Vec<LabeledInstance>> {
            xs.iter()
                .map(|i| Ok(LabeledInstance::new(f(&i.series)?, i.label)))
                .collect()
        };
        let train = map(&self.train)?;
        let test = map(&self.test)?;
        Self::new(self.name.clone(), train, test, self.class_names.clone())
    }

    /// Per-instance z-normalization of both splits.
    pub fn z_normalized(&self) -> Result<Self> {
        self.map_series(z_normalize)
    }

    pub fn train_labels(&self) -> Vec<usize> {
        self.train.iter().map(|i| i.label).collect()
    }

    pub fn test_labels(&self) -> Vec<usize> {
        self.test.iter().map(|i| i.label).collect()
    }
}

/// Writes the z-normalized copy of `values` into `out`.
///
/// Population standard deviation (divisor `n`); a series whose standard
/// deviation is below [`ZERO_VARIANCE_EPS`] maps to all zeros.
pub(crate) fn z_normalize_into(values: &[f64], out: &mut [f64]) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < ZERO_VARIANCE_EPS {
        out.iter_mut().for_each(|o| *o = 0.0);
    } else {
        for (o, v) in out.iter_mut().zip(values) {
            *o = (v - mean) / std;
        }
    }
}

/// Zero mean, unit population standard deviation.
pub fn z_normalize(series: &TimeSeries) -> Result<TimeSeries> {
    if series.len() < 2 {
        return invalid(format!(
            "z_normalize needs at least 2 points, got {}",
            series.len()
        ));
    }
    let mut out = vec![0.0; series.len()];
    z_normalize_into(series.values(), &mut out);
    Ok(TimeSeries(out))
}

/// Fraction of positions where `predictions` and `truth` agree.
pub fn accuracy(predictions: &[usize], truth: &[usize]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return invalid(format!(
            "accuracy: {} predictions for {} labels",
            predictions.len(),
            truth.len()
        ));
    }
    if truth.is_empty() {
        return invalid("accuracy: empty label sequence");
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn z_normalize_three_points() {
        let z = z_normalize(&ts(&[1.0, 2.0, 3.0])).unwrap();
        let expected = [-1.224744871391589, 0.0, 1.224744871391589];
        for (a, b) in z.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn z_normalize_constant_and_short() {
        assert_eq!(z_normalize(&ts(&[7.0; 4])).unwrap().values(), &[0.0; 4]);
        assert!(z_normalize(&ts(&[1.0])).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new(vec![f64::INFINITY]).is_err());
        assert!(TimeSeries::new(vec![]).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[0, 1, 1], &[0, 1, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 0, 0, 0], &[1, 1, 1, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[0, 1, 0, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert!(accuracy(&[0], &[0, 1]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn subsequence_bounds() {
        let s = ts(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.subsequence(1, 3).unwrap().values(), &[1.0, 2.0, 3.0]);
        assert!(s.subsequence(3, 3).is_err());
        assert!(s.subsequence(0, 5).is_err());
        assert!(s.subsequence(0, 0).is_err());
    }

    #[test]
    fn dataset_invariants() {
        let inst = |v: &[f64], l| LabeledInstance::new(ts(v), l);
        let names = vec!["a".to_string(), "b".to_string()];
        assert!(SplitDataset::new(
            "ok",
            vec![inst(&[1.0, 2.0], 0), inst(&[2.0, 1.0], 1)],
            vec![inst(&[0.0, 0.0], 1)],
            names.clone()
        )
        .is_ok());
        // ragged lengths
        assert!(SplitDataset::new(
            "bad",
            vec![inst(&[1.0, 2.0], 0), inst(&[2.0, 1.0, 3.0], 1)],
            vec![],
            names.clone()
        )
        .is_err());
        // test class missing from train
        assert!(SplitDataset::new(
            "bad",
            vec![inst(&[1.0, 2.0], 0), inst(&[2.0, 1.0], 0)],
            vec![inst(&[0.0, 0.0], 1)],
            names
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn z_normalize_moments_and_idempotence(v in prop::collection::vec(-1e3f64..1e3, 2..64)) {
            let x = ts(&v);
            let z = z_normalize(&x).unwrap();
            let zz = z_normalize(&z).unwrap();
            for (a, b) in z.values().iter().zip(zz.values()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            if sd > 1e-6 {
                let zm = z.values().iter().sum::<f64>() / n;
                let zs = (z.values().iter().map(|x| (x - zm).powi(2)).sum::<f64>() / n).sqrt();
                prop_assert!(zm.abs() < 1e-10);
                prop_assert!((zs - 1.0).abs() < 1e-10);
            }
        }
    }
}
