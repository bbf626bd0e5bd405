//! Archive-layout TSV files: `<Name>_TRAIN.tsv` and `<Name>_TEST.tsv`, one
//! instance per line, label first, values after, tab separated.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::series::{LabeledInstance, SplitDataset, TimeSeries};

type RawRow = (String, Vec<f64>);

fn parse_file(path: &Path) -> Result<Vec<RawRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let label = fields.next().unwrap_or("").trim();
        if label.is_empty() {
            return Err(parse_err(path, lineno, "missing class label"));
        }
        let values = fields
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| parse_err(path, lineno, format!("bad value {f:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(parse_err(path, lineno, "no values after the label"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(path, lineno, "non-finite value"));
        }
        rows.push((label.to_string(), values));
    }
    if rows.is_empty() {
        return Err(parse_err(path, 0, "file contains no instances"));
    }
    Ok(rows)
}

fn parse_err(path: &Path, lineno: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line: lineno + 1,
        msg: msg.into(),
    }
}

/// Label interning order: numeric when every label parses as a number,
/// lexicographic otherwise.
fn class_order(labels: &BTreeSet<&str>) -> Vec<String> {
    let mut names: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
    let numeric: Option<Vec<f64>> = names.iter().map(|s| s.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut paired: Vec<(f64, String)> = nums.into_iter().zip(names).collect();
        paired.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        names = paired.into_iter().map(|(_, s)| s).collect();
    }
    names
}

pub fn split_paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("{name}_TRAIN.tsv")),
        dir.join(format!("{name}_TEST.tsv")),
    )
}

/// Loads `<dir>/<name>_TRAIN.tsv` and `<dir>/<name>_TEST.tsv`.
pub fn load_dataset(dir: &Path, name: &str) -> Result<SplitDataset> {
    let (train_path, test_path) = split_paths(dir, name);
    let train_raw = parse_file(&train_path)?;
    let test_raw = parse_file(&test_path)?;

    let labels: BTreeSet<&str> = train_raw
        .iter()
        .chain(&test_raw)
        .map(|(l, _)| l.as_str())
        .collect();
    let class_names = class_order(&labels);
    let index_of = |l: &str| class_names.iter().position(|c| c == l).unwrap();

    let build = |rows: Vec<RawRow>| -> Result<Vec<LabeledInstance>> {
        rows.into_iter()
            .map(|(l, v)| Ok(LabeledInstance::new(TimeSeries::new(v)?, index_of(&l))))
            .collect()
    };
    let train = build(train_raw)?;
    let test = build(test_raw)?;
    SplitDataset::new(name, train, test, class_names.clone())
}

/// Writes both splits of `ds` into `dir` using the archive layout.
pub fn save_dataset(ds: &SplitDataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (train_path, test_path) = split_paths(dir, &ds.name);
    fs::write(train_path, render_split(ds, &ds.train))?;
    fs::write(test_path, render_split(ds, &ds.test))?;
    Ok(())
}

fn render_split(ds: &SplitDataset, instances: &[LabeledInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&ds.class_names[inst.label]);
        for v in inst.series.values() {
            out.push('\t');
            // Display for f64 prints the shortest round-tripping form.
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Dataset names with both split files present directly in `dir`, sorted.
pub fn dataset_names_in(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir)? {
        let file_name = entry?.file_name();
        let Some(file_name) = file_name.to_str() else {
            continue;
        };
        if let Some(name) = file_name.strip_suffix("_TRAIN.tsv") {
            if dir.join(format!("{name}_TEST.tsv")).is_file() {
                names.push(name.to_string());
            }
        }
    }
    names.sort();
    Ok(names)
}

/// Resolves a user path into `(directory, dataset name)` pairs.
///
/// Accepts a directory holding split files, or an archive root whose
/// subdirectories hold them (the usual `Archive/Name/Name_TRAIN.tsv` layout).
pub fn discover_datasets(path: &Path) -> Result<Vec<(PathBuf, String)>> {
    if !path.is_dir() {
        return Err(Error::InvalidArgument(format!(
            "{} is not a directory",
            path.display()
        )));
    }
    let mut found: Vec<(PathBuf, String)> = dataset_names_in(path)?
        .into_iter()
        .map(|n| (path.to_path_buf(), n))
        .collect();
    if found.is_empty() {
        let mut subdirs: Vec<PathBuf> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        subdirs.sort();
        for sub in subdirs {
            for n in dataset_names_in(&sub)? {
                found.push((sub.clone(), n));
            }
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_values_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("Toy_TRAIN.tsv"),
            "2\t0.1\t-1e-7\t3\n-1\t1\t2\t3.5\n10\t0\t0\t0\n",
        )
        .unwrap();
        fs::write(dir.path().join("Toy_TEST.tsv"), "10\t1\t1\t1\n").unwrap();

        let ds = load_dataset(dir.path(), "Toy").unwrap();
        assert_eq!(ds.class_names, vec!["-1", "2", "10"]);
        assert_eq!(ds.train_labels(), vec![1, 0, 2]);
        assert_eq!(ds.series_length, 3);
        assert_eq!(ds.train[0].series.values(), &[0.1, -1e-7, 3.0]);

        let out = tempfile::tempdir().unwrap();
        save_dataset(&ds, out.path()).unwrap();
        let again = load_dataset(out.path(), "Toy").unwrap();
        assert_eq!(ds, again);
        assert_eq!(dataset_names_in(out.path()).unwrap(), vec!["Toy"]);
    }

    #[test]
    fn parse_errors_carry_location() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("Bad_TRAIN.tsv"), "1\t0.5\n1\tfoo\n").unwrap();
        fs::write(dir.path().join("Bad_TEST.tsv"), "1\t0.5\n").unwrap();
        match load_dataset(dir.path(), "Bad") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn discovers_archive_subdirectories() {
        let root = tempfile::tempdir().unwrap();
        for name in ["B", "A"] {
            let sub = root.path().join(name);
            fs::create_dir(&sub).unwrap();
            fs::write(sub.join(format!("{name}_TRAIN.tsv")), "0\t1\n").unwrap();
            fs::write(sub.join(format!("{name}_TEST.tsv")), "0\t1\n").unwrap();
        }
        let found = discover_datasets(root.path()).unwrap();
        let names: Vec<_> = found.iter().map(|(_, n)| n.as_str()).collect();
        assert_eq!(names, vec!["A", "B"]);
    }
}
