//! One-vs-rest ridge read-out shared by the feature-based classifiers.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::rng::Prng;
use crate::series::ZERO_VARIANCE_EPS;

use super::features::FeatureMatrix;

pub const CV_FOLDS: usize = 5;

/// `10^-3, 10^-2, ..., 10^3`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-3..=3).map(|e| 10f64.powi(e)).collect()
}

/// Column mean and population std from training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &FeatureMatrix) -> Self {
        let (n, p) = (x.rows() as f64, x.cols());
        let mut mean = vec![0.0; p];
        let mut std = vec![0.0; p];
        for j in 0..p {
            let m = (0..x.rows()).map(|i| x.get(i, j)).sum::<f64>() / n;
            let v = (0..x.rows()).map(|i| (x.get(i, j) - m).powi(2)).sum::<f64>() / n;
            mean[j] = m;
            std[j] = v.sqrt();
        }
        Self { mean, std }
    }

    /// Zero-variance columns map to all zeros.
    pub fn apply(&self, x: &FeatureMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(x.rows(), x.cols(), |i, j| {
            if self.std[j] < ZERO_VARIANCE_EPS {
                0.0
            } else {
                (x.get(i, j) - self.mean[j]) / self.std[j]
            }
        })
    }

    pub fn is_degenerate(&self) -> bool {
        self.std.iter().all(|&s| s < ZERO_VARIANCE_EPS)
    }
}

fn cholesky_solve(mut a: DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(ch) = a.clone().cholesky() {
        return Ok(ch.solve(rhs));
    }
    let dim = a.nrows().max(1) as f64;
    let jitter = 1e-8 * a.trace() / dim;
    for i in 0..a.nrows() {
        a[(i, i)] += jitter;
    }
    a.cholesky()
        .map(|ch| ch.solve(rhs))
        .ok_or_else(|| Error::InvalidArgument("ridge system is not positive definite".into()))
}

/// Solves `(Z^T Z + lambda I) W = Z^T Y`.
///
/// When there are more columns than rows the equivalent dual system
/// `W = Z^T (Z Z^T + lambda I)^{-1} Y` is factorized instead; both give the
/// same `W`.
pub fn solve_ridge(z: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64) -> Result<DMatrix<f64>> {
    if !(lambda > 0.0) {
        return invalid(format!("ridge lambda must be > 0, got {lambda}"));
    }
    if z.ncols() <= z.nrows() {
        let mut a = z.transpose() * z;
        for i in 0..a.nrows() {
            a[(i, i)] += lambda;
        }
        cholesky_solve(a, &(z.transpose() * y))
    } else {
        let mut k = z * z.transpose();
        for i in 0..k.nrows() {
            k[(i, i)] += lambda;
        }
        Ok(z.transpose() * cholesky_solve(k, y)?)
    }
}

/// Fitted linear scores `Z W + b` with the intercept taken from the target
/// means (the penalty does not touch it).
struct OvrModel {
    weights: DMatrix<f64>,
    intercept: DVector<f64>,
}

impl OvrModel {
    fn fit(z: &DMatrix<f64>, targets: &DMatrix<f64>, lambda: f64) -> Result<Self> {
        let intercept = DVector::from_fn(targets.ncols(), |c, _| targets.column(c).mean());
        let mut centered = targets.clone();
        for c in 0..centered.ncols() {
            centered.column_mut(c).add_scalar_mut(-intercept[c]);
        }
        let weights = solve_ridge(z, &centered, lambda)?;
        Ok(Self { weights, intercept })
    }

    fn predict(&self, z: &DMatrix<f64>) -> Vec<usize> {
        let scores = z * &self.weights;
        (0..scores.nrows())
            .map(|i| {
                let mut best = 0;
                for c in 1..scores.ncols() {
                    // strict: ties go to the smaller class index
                    if scores[(i, c)] + self.intercept[c] > scores[(i, best)] + self.intercept[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }
}

fn ovr_targets(labels: &[usize], n_classes: usize) -> DMatrix<f64> {
    DMatrix::from_fn(labels.len(), n_classes, |i, c| {
        if labels[i] == c {
            1.0
        } else {
            -1.0
        }
    })
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Stratified fold index per row. Rows of each class are shuffled and dealt
/// round-robin, continuing the count across classes.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, rng: &mut Prng) -> Vec<usize> {
    let mut assignment = vec![0; labels.len()];
    let mut counter = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        rng.shuffle(&mut members);
        for i in members {
            assignment[i] = counter % folds;
            counter += 1;
        }
    }
    assignment
}

fn majority_class(labels: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    labels.iter().for_each(|&l| counts[l] += 1);
    // first maximum: ties go to the smaller class
    let max = *counts.iter().max().unwrap_or(&0);
    counts.iter().position(|&c| c == max).unwrap_or(0)
}

/// Result of a ridge fit, kept for inspection and tests.
#[derive(Debug, Clone)]
pub struct RidgeFit {
    pub lambda: f64,
    pub cv_accuracy: Vec<f64>,
    pub predictions: Vec<usize>,
}

/// Standardizes, picks lambda by stratified cross-validation, refits on all
/// rows and predicts the test rows.
pub fn ridge_fit_predict(
    train: &FeatureMatrix,
    train_labels: &[usize],
    test: &FeatureMatrix,
    lambdas: &[f64],
    rng: &mut Prng,
) -> Result<RidgeFit> {
    let n_classes = train_labels.iter().max().map_or(0, |m| m + 1);
    if train_labels.iter().collect::<std::collections::BTreeSet<_>>().len() < 2 {
        return invalid("ridge read-out needs at least two classes");
    }
    if train.rows() != train_labels.len() || train.cols() == 0 || train.cols() != test.cols() {
        return invalid("ridge read-out: feature shapes do not match");
    }
    if lambdas.is_empty() {
        return invalid("empty lambda grid");
    }

    let scaler = Standardizer::fit(train);
    if scaler.is_degenerate() {
        let m = majority_class(train_labels, n_classes);
        return Ok(RidgeFit {
            lambda: lambdas[0],
            cv_accuracy: vec![],
            predictions: vec![m; test.rows()],
        });
    }
    let z = scaler.apply(train);
    let y = ovr_targets(train_labels, n_classes);

    let folds = CV_FOLDS.min(train.rows());
    let assignment = stratified_folds(train_labels, n_classes, folds, rng);
    let mut cv_accuracy = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let mut correct = 0usize;
        for f in 0..folds {
            let (fit_rows, held): (Vec<usize>, Vec<usize>) =
                (0..train.rows()).partition(|&i| assignment[i] != f);
            if held.is_empty() || fit_rows.is_empty() {
                continue;
            }
            let model = OvrModel::fit(&select_rows(&z, &fit_rows), &select_rows(&y, &fit_rows), lambda)?;
            let pred = model.predict(&select_rows(&z, &held));
            correct += held.iter().zip(pred).filter(|(&i, p)| train_labels[i] == *p).count();
        }
        cv_accuracy.push(correct as f64 / train.rows() as f64);
    }
    let mut best = 0;
    for (k, acc) in cv_accuracy.iter().enumerate() {
        if *acc > cv_accuracy[best] {
            best = k;
        }
    }
    let lambda = lambdas[best];
    let model = OvrModel::fit(&z, &y, lambda)?;
    Ok(RidgeFit {
        lambda,
        cv_accuracy,
        predictions: model.predict(&scaler.apply(test)),
    })
}
