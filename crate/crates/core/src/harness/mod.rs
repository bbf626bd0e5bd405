//! Experiment orchestration: the (dataset x classifier x transform x run)
//! matrix, its results file and the report built from it.

pub mod config;
pub mod report;
mod svg;

use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train_predict, ClassifierSpec};
use crate::error::{invalid, Error, Result};
use crate::io::{discover_datasets, load_dataset};
use crate::rng::{seed_from_fields, Prng};
use crate::series::{accuracy, LabeledInstance, SplitDataset};
use crate::synth;
use crate::transforms::{augment_dataset, apply_shared_permutation, make_permutation, AugmentSpec};

pub use config::{DatasetSource, ExperimentConfig, TransformSweep};
pub use report::{emit_report, emit_stats, ReportOptions};

pub const RESULTS_FILE: &str = "results.csv";
pub const SKIPPED_FILE: &str = "skipped.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Seed of one experiment cell.
///
/// FNV-1a 64 over the decimal/UTF-8 fields joined by `0x1F`, followed by the
/// SplitMix64 finalizer.
pub fn derive_seed(
    master_seed: u64,
    dataset: &str,
    classifier_id: &str,
    transform_id: &str,
    l_milli: u32,
    run: usize,
) -> u64 {
    seed_from_fields(&[
        master_seed.to_string().as_str(),
        dataset,
        classifier_id,
        transform_id,
        &l_milli.to_string(),
        &run.to_string(),
    ])
}

/// `l_fraction` in thousandths, the form it takes inside seeds.
pub fn l_milli(l_fraction: f64) -> u32 {
    (l_fraction * 1000.0).round() as u32
}

/// Run 0 keeps the published split. Later runs pool both splits and redraw
/// them without replacement, keeping each split's per-class counts.
pub fn resample_split(dataset: &SplitDataset, run: usize, rng: &mut Prng) -> Result<SplitDataset> {
    if run == 0 {
        return Ok(dataset.clone());
    }
    let k = dataset.n_classes();
    let mut train_counts = vec![0usize; k];
    let mut test_counts = vec![0usize; k];
    for i in &dataset.train {
        train_counts[i.label] += 1;
    }
    for i in &dataset.test {
        test_counts[i.label] += 1;
    }
    let pool: Vec<&LabeledInstance> = dataset.train.iter().chain(&dataset.test).collect();
    let mut to_train = vec![false; pool.len()];
    for class in 0..k {
        let mut members: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].label == class).collect();
        if members.len() < train_counts[class] + test_counts[class] {
            return invalid(format!(
                "class {} has {} instances, {} required",
                dataset.class_names[class],
                members.len(),
                train_counts[class] + test_counts[class]
            ));
        }
        rng.shuffle(&mut members);
        for &i in &members[..train_counts[class]] {
            to_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, inst) in pool.into_iter().enumerate() {
        if to_train[i] {
            train.push(inst.clone());
        } else {
            test.push(inst.clone());
        }
    }
    SplitDataset::new(dataset.name.clone(), train, test, dataset.class_names.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Transform {
    Identity,
    Permute,
    Augment(f64),
}

impl Transform {
    pub fn id(&self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Permute => "permute",
            Transform::Augment(_) => "augment",
        }
    }

    pub fn l_fraction(&self) -> f64 {
        match self {
            Transform::Augment(l) => *l,
            _ => 0.0,
        }
    }

    pub fn sweep(cfg: &TransformSweep) -> Vec<Transform> {
        let mut out = vec![Transform::Identity];
        if cfg.permute {
            out.push(Transform::Permute);
        }
        out.extend(cfg.l_fractions.iter().map(|&l| Transform::Augment(l)));
        out
    }

    /// Applies the transform with the (dataset, run) scoped seed, so every
    /// classifier sees the same transformed data.
    pub fn apply(
        &self,
        ds: &SplitDataset,
        master_seed: u64,
        run: usize,
        sigma: f64,
    ) -> Result<SplitDataset> {
        let seed = derive_seed(master_seed, &ds.name, "*", self.id(), l_milli(self.l_fraction()), run);
        match self {
            Transform::Identity => Ok(ds.clone()),
            Transform::Permute => {
                apply_shared_permutation(ds, &make_permutation(ds.series_length, seed)?)
            }
            Transform::Augment(l) => {
                let spec = AugmentSpec {
                    l_fraction: *l,
                    sigma,
                    seed,
                };
                Ok(augment_dataset(ds, &spec)?.0)
            }
        }
    }
}

/// One row of the results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub classifier: String,
    pub transform: String,
    pub l_fraction: f64,
    pub run: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub train_ms: Option<f64>,
    pub test_ms: Option<f64>,
}

impl RunRecord {
    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        (&self.dataset, &self.classifier, &self.transform)
            .cmp(&(&other.dataset, &other.classifier, &other.transform))
            .then(self.l_fraction.total_cmp(&other.l_fraction))
            .then(self.run.cmp(&other.run))
    }
}

/// A cell (or a whole dataset, with `*` fields) that produced no result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub dataset: String,
    pub classifier: String,
    pub transform: String,
    pub l_fraction: f64,
    pub run: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub datasets: usize,
    pub cells: usize,
    pub completed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<RunRecord>,
    pub skipped: Vec<SkipRecord>,
    pub cells: usize,
    pub results_path: PathBuf,
}

impl ExperimentOutcome {
    /// True when there was work to do and none of it succeeded.
    pub fn all_failed(&self) -> bool {
        self.records.is_empty() && (self.cells > 0 || !self.skipped.is_empty())
    }
}

fn load_sources(sources: &[DatasetSource]) -> (Vec<SplitDataset>, Vec<SkipRecord>) {
    let mut loaded = Vec::new();
    let mut skipped = Vec::new();
    let mut skip = |name: String, reason: String| {
        warn!("skipping dataset {name}: {reason}");
        skipped.push(SkipRecord {
            dataset: name,
            classifier: "*".into(),
            transform: "*".into(),
            l_fraction: 0.0,
            run: "*".into(),
            reason,
        });
    };
    for src in sources {
        match src {
            DatasetSource::Synth(spec) => {
                match synth::generate(spec).and_then(|d| d.z_normalized()) {
                    Ok(ds) => loaded.push(ds),
                    Err(e) => skip(spec.dataset_name(), e.to_string()),
                }
            }
            DatasetSource::Path(path) => match discover_datasets(path) {
                Ok(found) if found.is_empty() => {
                    skip(path.display().to_string(), "no datasets found".into())
                }
                Ok(found) => {
                    for (dir, name) in found {
                        match load_dataset(&dir, &name).and_then(|d| d.z_normalized()) {
                            Ok(ds) => loaded.push(ds),
                            Err(e) => skip(name, e.to_string()),
                        }
                    }
                }
                Err(e) => skip(path.display().to_string(), e.to_string()),
            },
        }
    }
    (loaded, skipped)
}

struct Cell<'a> {
    dataset: &'a SplitDataset,
    classifier: &'a ClassifierSpec,
    transform: Transform,
    run: usize,
}

fn run_cell(cell: &Cell, cfg: &ExperimentConfig) -> std::result::Result<RunRecord, Box<SkipRecord>> {
    let ds = cell.dataset;
    let clf_id = cell.classifier.id();
    let l = cell.transform.l_fraction();
    let seed = derive_seed(cfg.master_seed, &ds.name, &clf_id, cell.transform.id(), l_milli(l), cell.run);
    let attempt = || -> Result<(f64, f64)> {
        let split_seed = derive_seed(cfg.master_seed, &ds.name, "*", "split", 0, cell.run);
        let split = resample_split(ds, cell.run, &mut Prng::new(split_seed))?;
        let data = cell.transform.apply(&split, cfg.master_seed, cell.run, cfg.sigma)?;
        let spec = cell.classifier.clone().with_seed(seed);
        let t0 = Instant::now();
        let predictions = train_predict(&spec, &data.train, &data.test)?;
        let elapsed = t0.elapsed().as_secs_f64() * 1e3;
        Ok((accuracy(&predictions, &data.test_labels())?, elapsed))
    };
    match attempt() {
        // Fitting and prediction run as one call, so the whole wall time
        // lands in `train_ms` and `test_ms` stays empty.
        Ok((acc, elapsed)) => Ok(RunRecord {
            dataset: ds.name.clone(),
            classifier: clf_id,
            transform: cell.transform.id().into(),
            l_fraction: l,
            run: cell.run,
            seed,
            accuracy: acc,
            train_ms: cfg.record_timings.then_some(elapsed),
            test_ms: None,
        }),
        Err(e) => Err(Box::new(SkipRecord {
            dataset: ds.name.clone(),
            classifier: clf_id,
            transform: cell.transform.id().into(),
            l_fraction: l,
            run: cell.run.to_string(),
            reason: e.to_string(),
        })),
    }
}

/// Runs every cell of `cfg` and returns the sorted records, without
/// touching the filesystem beyond reading datasets.
pub fn execute(cfg: &ExperimentConfig) -> Result<(Vec<RunRecord>, Vec<SkipRecord>, usize)> {
    cfg.validate()?;
    let (datasets, mut skipped) = load_sources(&cfg.datasets);
    let transforms = Transform::sweep(&cfg.transforms);
    let mut cells = Vec::new();
    for ds in &datasets {
        for clf in &cfg.classifiers {
            for &t in &transforms {
                for run in 0..cfg.runs {
                    cells.push(Cell {
                        dataset: ds,
                        classifier: clf,
                        transform: t,
                        run,
                    });
                }
            }
        }
    }
    info!("{} datasets, {} cells", datasets.len(), cells.len());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<_> = pool.install(|| cells.par_iter().map(|c| run_cell(c, cfg)).collect());
    let mut records = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            Ok(r) => records.push(r),
            Err(s) => {
                warn!("cell failed: {} {} {} run {}: {}", s.dataset, s.classifier, s.transform, s.run, s.reason);
                skipped.push(*s)
            }
        }
    }
    records.sort_by(|a, b| a.sort_key_cmp(b));
    Ok((records, skipped, cells.len()))
}

pub fn write_results(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if records.is_empty() {
        w.write_record([
            "dataset", "classifier", "transform", "l_fraction", "run", "seed", "accuracy",
            "train_ms", "test_ms",
        ])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let records = r.deserialize().collect::<std::result::Result<Vec<RunRecord>, _>>()?;
    for rec in &records {
        if !(0.0..=1.0).contains(&rec.accuracy) {
            return invalid(format!(
                "{}: accuracy {} outside [0, 1]",
                path.display(),
                rec.accuracy
            ));
        }
    }
    Ok(records)
}

/// Runs the experiment and writes `results.csv`, `manifest.json` and, when
/// anything failed, `skipped.csv` into `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let (records, skipped, cells) = execute(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let results_path = cfg.out_dir.join(RESULTS_FILE);
    write_results(&results_path, &records)?;

    let skipped_path = cfg.out_dir.join(SKIPPED_FILE);
    if skipped.is_empty() {
        if skipped_path.exists() {
            fs::remove_file(&skipped_path)?;
        }
    } else {
        let mut w = csv::Writer::from_path(&skipped_path)?;
        for s in &skipped {
            w.serialize(s)?;
        }
        w.flush()?;
    }

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: cfg.hash(),
        datasets: {
            let mut names: Vec<&str> = records.iter().map(|r| r.dataset.as_str()).collect();
            names.dedup();
            names.len()
        },
        cells,
        completed: records.len(),
        skipped: skipped.len(),
    };
    fs::write(
        cfg.out_dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(ExperimentOutcome {
        records,
        skipped,
        cells,
        results_path,
    })
}
