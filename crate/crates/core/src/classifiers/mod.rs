//! Desk-scale classifiers, one per benchmark category.
//!
//! | kind             | category        | pipeline                               |
//! |------------------|-----------------|----------------------------------------|
//! | `nn1_euclid`     | tabular         | 1-NN, squared Euclidean                |
//! | `nn1_dtw`        | distance        | 1-NN, banded DTW                       |
//! | `kernel_conv`    | kernel          | random dilated kernels -> ridge        |
//! | `shapelet`       | shapelet        | info-gain shapelets -> ridge           |
//! | `interval`       | interval        | fixed random intervals -> ridge        |
//! | `global_feature` | feature         | 8 global statistics -> ridge           |
//!
//! Every pipeline is a pure function of its spec, training set and test set.

pub mod distance;
pub mod features;
pub mod global;
pub mod interval;
pub mod kernel;
pub mod ridge;
pub mod shapelet;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::Prng;
use crate::series::LabeledInstance;

pub use distance::{dtw_distance, nn1, squared_euclidean, Metric};
pub use features::FeatureMatrix;
pub use global::global_features;
pub use interval::interval_features;
pub use kernel::kernel_conv_features;
pub use ridge::{ridge_fit_predict, solve_ridge};
pub use shapelet::{best_information_gain, shapelet_min_distance, shapelet_select};

/// Default DTW band as a fraction of the series length (unconstrained).
pub const DEFAULT_DTW_BAND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Nn1Euclid,
    Nn1Dtw,
    KernelConv,
    Shapelet,
    Interval,
    GlobalFeature,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Nn1Euclid,
        ClassifierKind::Nn1Dtw,
        ClassifierKind::KernelConv,
        ClassifierKind::Shapelet,
        ClassifierKind::Interval,
        ClassifierKind::GlobalFeature,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ClassifierKind::Nn1Euclid => "nn1_euclid",
            ClassifierKind::Nn1Dtw => "nn1_dtw",
            ClassifierKind::KernelConv => "kernel_conv",
            ClassifierKind::Shapelet => "shapelet",
            ClassifierKind::Interval => "interval",
            ClassifierKind::GlobalFeature => "global_feature",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown classifier kind {s:?}")))
    }
}

/// Kind-specific parameters. Unset fields take the documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierParams {
    /// DTW band fraction in (0, 1].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<f64>,
    /// Number of random kernels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<usize>,
    /// Shapelet candidates drawn.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<usize>,
    /// Shapelets kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keep: Option<usize>,
    /// Number of intervals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Identifier used in results; defaults to the kind name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub params: ClassifierParams,
    #[serde(default)]
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        Self {
            kind,
            name: None,
            params: ClassifierParams::default(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn id(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.to_string())
    }

    /// Checks the parameters against their documented ranges.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if let Some(b) = p.band {
            if !(b > 0.0 && b <= 1.0) {
                return invalid(format!("band must be in (0, 1], got {b}"));
            }
        }
        for (name, v) in [
            ("kernels", p.kernels),
            ("candidates", p.candidates),
            ("keep", p.keep),
            ("intervals", p.intervals),
        ] {
            if v == Some(0) {
                return invalid(format!("{name} must be >= 1"));
            }
        }
        if let Some(l) = &p.lambdas {
            if l.is_empty() || l.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return invalid("lambdas must be a non-empty list of positive numbers");
            }
        }
        Ok(())
    }

    fn lambdas(&self) -> Vec<f64> {
        self.params.lambdas.clone().unwrap_or_else(ridge::default_lambda_grid)
    }
}

/// Trains on `train` and labels every instance of `test`.
pub fn train_predict(
    spec: &ClassifierSpec,
    train: &[LabeledInstance],
    test: &[LabeledInstance],
) -> Result<Vec<usize>> {
    spec.validate()?;
    let Some(first) = train.first() else {
        return invalid("empty training set");
    };
    let n = first.series.len();
    if train.iter().chain(test).any(|i| i.series.len() != n) {
        return invalid("all series must have equal length");
    }
    let labels: Vec<usize> = train.iter().map(|i| i.label).collect();
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    if labels.iter().all(|&l| l == labels[0]) {
        return invalid("training set has a single class");
    }
    let xs: Vec<&[f64]> = train.iter().map(|i| i.series.values()).collect();
    let qs: Vec<&[f64]> = test.iter().map(|i| i.series.values()).collect();
    if qs.is_empty() {
        return Ok(vec![]);
    }

    let mut rng = Prng::new(spec.seed);
    let p = &spec.params;
    let (tr, te) = match spec.kind {
        ClassifierKind::Nn1Euclid => return nn1(Metric::Euclidean, &xs, &labels, &qs),
        ClassifierKind::Nn1Dtw => {
            let band = p.band.unwrap_or(DEFAULT_DTW_BAND);
            return nn1(Metric::Dtw { band }, &xs, &labels, &qs);
        }
        ClassifierKind::KernelConv => kernel_conv_features(
            &xs,
            &qs,
            p.kernels.unwrap_or(kernel::DEFAULT_KERNELS),
            &mut rng,
        )?,
        ClassifierKind::Interval => interval_features(
            &xs,
            &qs,
            p.intervals.unwrap_or(interval::DEFAULT_INTERVALS),
            &mut rng,
        )?,
        ClassifierKind::Shapelet => {
            let shapelets = shapelet_select(
                &xs,
                &labels,
                n_classes,
                p.candidates.unwrap_or(shapelet::DEFAULT_CANDIDATES),
                p.keep.unwrap_or(shapelet::DEFAULT_KEEP),
                &mut rng,
            )?;
            (
                shapelet::transform(&shapelets, &xs)?,
                shapelet::transform(&shapelets, &qs)?,
            )
        }
        ClassifierKind::GlobalFeature => (
            global::global_feature_matrix(&xs)?,
            global::global_feature_matrix(&qs)?,
        ),
    };
    Ok(ridge_fit_predict(&tr, &labels, &te, &spec.lambdas(), &mut rng)?.predictions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TimeSeries;

    fn inst(v: Vec<f64>, l: usize) -> LabeledInstance {
        LabeledInstance::new(TimeSeries::new(v).unwrap(), l)
    }

    fn toy(seed: u64) -> (Vec<LabeledInstance>, Vec<LabeledInstance>) {
        let mut rng = Prng::new(seed);
        let mut make = |k: usize| {
            (0..k)
                .map(|i| {
                    let c = i % 2;
                    let v = (0..24)
                        .map(|t| {
                            let base = if c == 0 { (t as f64 * 0.5).sin() } else { (t as f64 * 0.25).cos() };
                            base + 0.1 * rng.standard_normal()
                        })
                        .collect();
                    inst(v, c)
                })
                .collect::<Vec<_>>()
        };
        (make(20), make(10))
    }

    #[test]
    fn every_kind_is_deterministic_and_learns_an_easy_problem() {
        let (train, test) = toy(1);
        let truth: Vec<usize> = test.iter().map(|i| i.label).collect();
        for kind in ClassifierKind::ALL {
            let spec = ClassifierSpec::new(kind).with_seed(3);
            let a = train_predict(&spec, &train, &test).unwrap();
            let b = train_predict(&spec, &train, &test).unwrap();
            assert_eq!(a, b, "{kind}");
            let acc = crate::series::accuracy(&a, &truth).unwrap();
            assert!(acc >= 0.8, "{kind}: {acc}");
        }
    }

    #[test]
    fn exact_copy_gets_its_label() {
        let (train, _) = toy(2);
        let spec = ClassifierSpec::new(ClassifierKind::Nn1Euclid);
        let pred = train_predict(&spec, &train, &train[3..4]).unwrap();
        assert_eq!(pred, vec![train[3].label]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (train, test) = toy(3);
        let spec = ClassifierSpec::new(ClassifierKind::Interval);
        let one_class: Vec<_> = train.iter().filter(|i| i.label == 0).cloned().collect();
        assert!(train_predict(&spec, &one_class, &test).is_err());
        let short = vec![inst(vec![0.0; 5], 0)];
        assert!(train_predict(&spec, &train, &short).is_err());
        let mut bad = ClassifierSpec::new(ClassifierKind::Nn1Dtw);
        bad.params.band = Some(0.0);
        assert!(train_predict(&bad, &train, &test).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ClassifierKind::ALL {
            assert_eq!(k.as_str().parse::<ClassifierKind>().unwrap(), k);
            let json = serde_json::to_string(&k).unwrap();
            assert_eq!(json, format!("\"{}\"", k.as_str()));
        }
        assert!("weasel".parse::<ClassifierKind>().is_err());
    }
}
