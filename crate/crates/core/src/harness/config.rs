use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::error::{Error, Result};
use crate::synth::SynthSpec;
use crate::transforms::DEFAULT_SIGMA;

/// A dataset entry: a directory (dataset or archive root) or a synthetic spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    Path(PathBuf),
    Synth(SynthSpec),
}

/// Which transforms to run besides the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSweep {
    #[serde(default)]
    pub permute: bool,
    #[serde(default)]
    pub l_fractions: Vec<f64>,
}

impl Default for TransformSweep {
    /// Permutation plus padding at 10%..50% of the series length.
    fn default() -> Self {
        Self {
            permute: true,
            l_fractions: vec![0.1, 0.2, 0.3, 0.4, 0.5],
        }
    }
}

fn default_runs() -> usize {
    5
}
fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}
fn default_classifiers() -> Vec<ClassifierSpec> {
    ClassifierKind::ALL.iter().map(|&k| ClassifierSpec::new(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<DatasetSource>,
    #[serde(default = "default_classifiers")]
    pub classifiers: Vec<ClassifierSpec>,
    #[serde(default)]
    pub transforms: TransformSweep,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    /// Step std of the padding walk.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// Write wall-clock timings into `train_ms`/`test_ms`. Off by default
    /// because timings make the results file non-reproducible.
    #[serde(default)]
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn new(datasets: Vec<DatasetSource>, classifiers: Vec<ClassifierSpec>) -> Self {
        Self {
            datasets,
            classifiers,
            transforms: TransformSweep::default(),
            runs: default_runs(),
            master_seed: 0,
            out_dir: default_out_dir(),
            workers: 0,
            sigma: DEFAULT_SIGMA,
            record_timings: false,
        }
    }

    /// Reads a JSON config; relative paths resolve against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for d in cfg.datasets.iter_mut() {
            if let DatasetSource::Path(p) = d {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        if cfg.out_dir.is_relative() {
            cfg.out_dir = base.join(&cfg.out_dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if self.classifiers.is_empty() {
            return bad("no classifiers configured".into());
        }
        if let Some(l) = self.transforms.l_fractions.iter().find(|&&l| !(l > 0.0 && l <= 1.0)) {
            return bad(format!("l_fractions must lie in (0, 1], got {l}"));
        }
        if !(self.sigma >= 0.0) {
            return bad(format!("sigma must be >= 0, got {}", self.sigma));
        }
        let mut ids: Vec<String> = self.classifiers.iter().map(|c| c.id()).collect();
        ids.sort();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return bad("classifier ids must be unique (set `name` to disambiguate)".into());
        }
        for c in &self.classifiers {
            c.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding the worker count.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.workers = 0;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full_configs() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"datasets": ["data/Coffee", {"kind": "temporal", "seed": 3}]}"#).unwrap();
        assert_eq!(cfg.runs, 5);
        assert_eq!(cfg.classifiers.len(), 6);
        assert_eq!(cfg.transforms, TransformSweep::default());
        assert!(matches!(cfg.datasets[0], DatasetSource::Path(_)));
        match &cfg.datasets[1] {
            DatasetSource::Synth(s) => assert_eq!(s.n, 128),
            _ => panic!(),
        }

        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"datasets": [], "classifiers": [{"kind": "nn1_dtw", "params": {"band": 0.1}}],
                "transforms": {"permute": false, "l_fractions": []}, "runs": 2,
                "master_seed": 9, "out_dir": "o", "workers": 3}"#,
        )
        .unwrap();
        assert!(!cfg.transforms.permute);
        assert_eq!(cfg.classifiers[0].params.band, Some(0.1));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"datasets": [], "bogus": 1}"#).is_err());
        let mut cfg = ExperimentConfig::new(vec![], default_classifiers());
        cfg.runs = 0;
        assert!(cfg.validate().is_err());
        cfg.runs = 1;
        cfg.transforms.l_fractions = vec![1.5];
        assert!(cfg.validate().is_err());
        cfg.transforms.l_fractions = vec![0.5];
        cfg.classifiers.push(ClassifierSpec::new(ClassifierKind::Shapelet));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hash_ignores_workers() {
        let mut a = ExperimentConfig::new(vec![], default_classifiers());
        let h = a.hash();
        a.workers = 8;
        assert_eq!(a.hash(), h);
        a.runs = 3;
        assert_ne!(a.hash(), h);
    }
}
