//! Permutation tests and misalignment augmentation for time series
//! classification benchmarks, with a small classifier suite, the statistics
//! to compare them, synthetic data and an experiment harness.

// `!(x >= 0.0)` rejects NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classifiers;
pub mod error;
pub mod harness;
pub mod io;
pub mod rng;
pub mod series;
pub mod stats;
pub mod synth;
pub mod transforms;

pub use error::{Error, Result};
pub use rng::Prng;
pub use series::{LabeledInstance, SplitDataset, TimeSeries};
