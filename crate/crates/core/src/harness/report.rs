//! Tables, plots and a markdown summary built from a results file.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::svg::{color, escape, Canvas};
use super::{l_milli, read_results, RunRecord};
use crate::error::{invalid, Result};
use crate::stats::{
    significance_cliques, wilcoxon_signed_rank, AccuracyTable, Alternative, CliqueReport,
    RunSummary,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub alpha: f64,
    pub k_std: f64,
    pub holm: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            k_std: 1.0,
            holm: false,
        }
    }
}

/// A transform at a given padding level (`l_milli` is 0 unless augmenting).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Condition {
    pub transform: String,
    pub l_milli: u32,
}

impl Condition {
    fn identity() -> Self {
        Self {
            transform: "identity".into(),
            l_milli: 0,
        }
    }

    pub fn l_fraction(&self) -> f64 {
        self.l_milli as f64 / 1000.0
    }

    fn is_identity(&self) -> bool {
        self.transform == "identity"
    }

    fn label(&self) -> String {
        if self.transform == "augment" {
            format!("augment l={}", self.l_fraction())
        } else {
            self.transform.clone()
        }
    }

    fn file_stem(&self) -> String {
        if self.transform == "augment" {
            format!("augment_{:03}", self.l_milli)
        } else {
            self.transform.clone()
        }
    }
}

/// One-sided test that accuracy under `transform` is below the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueRow {
    pub classifier: String,
    pub transform: String,
    pub l_fraction: f64,
    pub n_datasets: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub method: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictRow {
    pub dataset: String,
    pub classifier: String,
    pub ori_mean: f64,
    pub ori_std: f64,
    pub per_mean: f64,
    pub per_std: f64,
    pub runs: usize,
    pub k_std: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub transform: String,
    pub l_fraction: f64,
    pub classifier: String,
    pub mean_rank: f64,
    pub n_datasets: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliqueEntry {
    pub transform: String,
    pub l_fraction: f64,
    pub n_datasets: usize,
    #[serde(flatten)]
    pub report: CliqueReport,
}

/// Per-dataset (original, transformed) mean accuracies of one classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSet {
    pub classifier: String,
    pub condition: Condition,
    pub points: Vec<(String, f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct StatsTables {
    pub pvalues: Vec<PValueRow>,
    pub verdicts: Vec<VerdictRow>,
    pub ranks: Vec<RankRow>,
    pub cliques: Vec<CliqueEntry>,
    pub scatters: Vec<ScatterSet>,
    pub warnings: Vec<String>,
    pub classifiers: Vec<String>,
    pub datasets: Vec<String>,
}

type Key = (String, Condition, String);

fn group(records: &[RunRecord]) -> BTreeMap<Key, Vec<f64>> {
    let mut cells: BTreeMap<Key, Vec<f64>> = BTreeMap::new();
    for r in records {
        let cond = Condition {
            transform: r.transform.clone(),
            l_milli: l_milli(r.l_fraction),
        };
        cells
            .entry((r.classifier.clone(), cond, r.dataset.clone()))
            .or_default()
            .push(r.accuracy);
    }
    cells
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Computes every statistical table from the records of a results file.
pub fn compute_tables(records: &[RunRecord], opts: &ReportOptions) -> Result<StatsTables> {
    if records.is_empty() {
        return invalid("results contain no records");
    }
    let cells = group(records);
    let classifiers: Vec<String> = records
        .iter()
        .map(|r| r.classifier.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let datasets: Vec<String> = records
        .iter()
        .map(|r| r.dataset.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let conditions: Vec<Condition> = cells
        .keys()
        .map(|(_, c, _)| c.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let runs = |c: &str, cond: &Condition, d: &str| cells.get(&(c.to_string(), cond.clone(), d.to_string()));
    let mut t = StatsTables {
        classifiers: classifiers.clone(),
        datasets: datasets.clone(),
        ..Default::default()
    };
    let identity = Condition::identity();

    for c in &classifiers {
        for cond in conditions.iter().filter(|c| !c.is_identity()) {
            let mut points = Vec::new();
            let mut missing = Vec::new();
            for d in &datasets {
                match (runs(c, &identity, d), runs(c, cond, d)) {
                    (Some(a), Some(b)) => points.push((d.clone(), mean(a), mean(b))),
                    (None, None) => {}
                    _ => missing.push(d.as_str()),
                }
            }
            if !missing.is_empty() {
                t.warnings.push(format!(
                    "{c} {}: missing identity or transformed cells for {}",
                    cond.label(),
                    missing.join(", ")
                ));
            }
            let mut row = PValueRow {
                classifier: c.clone(),
                transform: cond.transform.clone(),
                l_fraction: cond.l_fraction(),
                n_datasets: points.len(),
                statistic: None,
                p_value: None,
                method: String::new(),
                note: String::new(),
            };
            if points.is_empty() {
                row.note = "omitted: no dataset has both identity and transformed cells".into();
                t.warnings.push(format!("{c} {}: comparison omitted", cond.label()));
            } else {
                let a: Vec<f64> = points.iter().map(|p| p.1).collect();
                let b: Vec<f64> = points.iter().map(|p| p.2).collect();
                let w = wilcoxon_signed_rank(&a, &b, Alternative::AGreater)?;
                row.statistic = Some(w.statistic);
                row.p_value = Some(w.p_value);
                row.method = serde_json::to_value(w.method)?
                    .as_str()
                    .unwrap_or_default()
                    .to_string();
                if w.degenerate {
                    row.note = "all differences are zero".into();
                }
                t.scatters.push(ScatterSet {
                    classifier: c.clone(),
                    condition: cond.clone(),
                    points,
                });
            }
            t.pvalues.push(row);
        }
    }

    let permute = Condition {
        transform: "permute".into(),
        l_milli: 0,
    };
    for d in &datasets {
        for c in &classifiers {
            let (Some(ori), Some(per)) = (runs(c, &identity, d), runs(c, &permute, d)) else {
                continue;
            };
            match (RunSummary::from_runs(ori), RunSummary::from_runs(per)) {
                (Ok(o), Ok(p)) => t.verdicts.push(VerdictRow {
                    dataset: d.clone(),
                    classifier: c.clone(),
                    ori_mean: o.mean,
                    ori_std: o.std,
                    per_mean: p.mean,
                    per_std: p.std,
                    runs: o.runs.min(p.runs),
                    k_std: opts.k_std,
                    flagged: crate::stats::filter_verdict(&o, &p, opts.k_std),
                }),
                _ => t.warnings.push(format!(
                    "{d} {c}: filter verdict needs at least 2 runs per transform"
                )),
            }
        }
    }

    for cond in &conditions {
        let (complete, partial): (Vec<&String>, Vec<&String>) = datasets
            .iter()
            .filter(|d| classifiers.iter().any(|c| runs(c, cond, d).is_some()))
            .partition(|d| classifiers.iter().all(|c| runs(c, cond, d).is_some()));
        if !partial.is_empty() {
            t.warnings.push(format!(
                "ranks at {}: dropped datasets with missing classifiers: {}",
                cond.label(),
                partial.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
            ));
        }
        if complete.is_empty() {
            continue;
        }
        let values = classifiers
            .iter()
            .map(|c| complete.iter().map(|d| mean(runs(c, cond, d).unwrap())).collect())
            .collect();
        let table = AccuracyTable::new(
            classifiers.clone(),
            complete.iter().map(|s| s.to_string()).collect(),
            values,
        )?;
        let report = if classifiers.len() == 1 {
            CliqueReport {
                mean_ranks: vec![(classifiers[0].clone(), 1.0)],
                pairwise: vec![],
                cliques: vec![classifiers.clone()],
            }
        } else {
            significance_cliques(&table, opts.alpha, opts.holm)?
        };
        for (c, r) in &report.mean_ranks {
            t.ranks.push(RankRow {
                transform: cond.transform.clone(),
                l_fraction: cond.l_fraction(),
                classifier: c.clone(),
                mean_rank: *r,
                n_datasets: complete.len(),
            });
        }
        t.cliques.push(CliqueEntry {
            transform: cond.transform.clone(),
            l_fraction: cond.l_fraction(),
            n_datasets: complete.len(),
            report,
        });
    }
    Ok(t)
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

impl StatsTables {
    /// Writes `pvalues.csv`, `filter_verdicts.csv`, `mean_ranks.csv`,
    /// `cliques.json` and, if there are any, `warnings.txt`.
    pub fn write_tables(&self, out: &Path) -> Result<()> {
        fs::create_dir_all(out)?;
        write_csv(
            &out.join("pvalues.csv"),
            &["classifier", "transform", "l_fraction", "n_datasets", "statistic", "p_value", "method", "note"],
            &self.pvalues,
        )?;
        write_csv(
            &out.join("filter_verdicts.csv"),
            &["dataset", "classifier", "ori_mean", "ori_std", "per_mean", "per_std", "runs", "k_std", "flagged"],
            &self.verdicts,
        )?;
        write_csv(
            &out.join("mean_ranks.csv"),
            &["transform", "l_fraction", "classifier", "mean_rank", "n_datasets"],
            &self.ranks,
        )?;
        fs::write(
            out.join("cliques.json"),
            serde_json::to_string_pretty(&self.cliques)? + "\n",
        )?;
        let warnings = out.join("warnings.txt");
        if self.warnings.is_empty() {
            if warnings.exists() {
                fs::remove_file(warnings)?;
            }
        } else {
            fs::write(warnings, self.warnings.join("\n") + "\n")?;
        }
        Ok(())
    }

    /// Identity plus every padding level, in increasing `l`.
    fn l_curve(&self) -> Vec<(f64, String)> {
        let mut out: Vec<(f64, String)> = self
            .cliques
            .iter()
            .filter(|e| e.transform == "identity" || e.transform == "augment")
            .map(|e| (e.l_fraction, e.transform.clone()))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    pub fn pvalue_svg(&self) -> String {
        let rows: Vec<&PValueRow> = self
            .pvalues
            .iter()
            .filter(|r| r.transform == "augment" && r.p_value.is_some())
            .collect();
        let ls: Vec<f64> = rows.iter().map(|r| r.l_fraction).collect();
        let lo = ls.iter().copied().fold(f64::INFINITY, f64::min).min(0.1);
        let hi = ls.iter().copied().fold(0.0, f64::max).max(lo);
        let logp = |p: f64| -p.log10();
        let top = rows
            .iter()
            .map(|r| logp(r.p_value.unwrap()))
            .fold(2.0_f64, f64::max)
            .ceil();
        let mut canvas = Canvas::new(
            "Identity vs padded accuracy (one-sided Wilcoxon)",
            "padding fraction l",
            "-log10 p",
            (lo, hi),
            (0.0, top),
            false,
        );
        let alpha_line = -(0.05f64).log10();
        canvas.line("alpha", "data-alpha=\"0.05\"", (lo, alpha_line), (hi, alpha_line), "#999", 1.0);
        for (i, c) in self.classifiers.iter().enumerate() {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| &r.classifier == c)
                .map(|r| (r.l_fraction, logp(r.p_value.unwrap())))
                .collect();
            if !pts.is_empty() {
                canvas.series(i, c, &pts);
            }
        }
        canvas.finish()
    }

    /// Mean rank against `l` with one bar per no-significance clique.
    pub fn rank_svg(&self) -> String {
        let curve = self.l_curve();
        let k = self.classifiers.len() as f64;
        let (lo, hi) = match (curve.first(), curve.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => (0.0, 1.0),
        };
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut canvas = Canvas::new(
            "Mean rank vs padding fraction",
            "padding fraction l",
            "mean rank (1 = best)",
            (lo - 0.05 * span, hi + 0.05 * span),
            (1.0, k.max(2.0)),
            true,
        );
        for (i, c) in self.classifiers.iter().enumerate() {
            let pts: Vec<(f64, f64)> = curve
                .iter()
                .filter_map(|(l, tr)| {
                    self.ranks
                        .iter()
                        .find(|r| &r.transform == tr && r.l_fraction == *l && &r.classifier == c)
                        .map(|r| (*l, r.mean_rank))
                })
                .collect();
            canvas.series(i, c, &pts);
        }
        for (l, tr) in &curve {
            let entry = self
                .cliques
                .iter()
                .find(|e| &e.transform == tr && e.l_fraction == *l)
                .expect("curve built from cliques");
            let rank_of = |name: &str| {
                entry
                    .report
                    .mean_ranks
                    .iter()
                    .find(|(c, _)| c == name)
                    .map_or(0.0, |(_, r)| *r)
            };
            let n = entry.report.cliques.len().max(1) as f64;
            for (j, clique) in entry.report.cliques.iter().enumerate() {
                let x = l + (j as f64 + 1.0) / (n + 1.0) * 0.03 * span;
                let ranks: Vec<f64> = clique.iter().map(|c| rank_of(c)).collect();
                let top = ranks.iter().copied().fold(f64::INFINITY, f64::min);
                let bottom = ranks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let attrs = format!(
                    "data-transform=\"{tr}\" data-l=\"{l}\" data-members=\"{}\"",
                    escape(&clique.join("|"))
                );
                canvas.line("clique", &attrs, (x, top), (x, bottom), "black", 3.0);
            }
        }
        canvas.finish()
    }

    pub fn scatter_svg(&self, set: &ScatterSet) -> String {
        let mut canvas = Canvas::new(
            &format!("{}: identity vs {}", set.classifier, set.condition.label()),
            "accuracy (identity)",
            &format!("accuracy ({})", set.condition.label()),
            (0.0, 1.0),
            (0.0, 1.0),
            false,
        );
        canvas.line("diagonal", "", (0.0, 0.0), (1.0, 1.0), "#999", 1.0);
        let col = color(self.classifiers.iter().position(|c| c == &set.classifier).unwrap_or(0));
        for (d, x, y) in &set.points {
            canvas.point(
                "point",
                &format!("data-dataset=\"{}\" data-x=\"{x}\" data-y=\"{y}\"", escape(d)),
                *x,
                *y,
                col,
            );
        }
        canvas.finish()
    }

    pub fn summary_markdown(&self, opts: &ReportOptions) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Benchmark report\n");
        let _ = writeln!(
            s,
            "{} datasets, {} classifiers. alpha = {}, k_std = {}{}.\n",
            self.datasets.len(),
            self.classifiers.len(),
            opts.alpha,
            opts.k_std,
            if opts.holm { ", Holm-adjusted cliques" } else { "" }
        );

        let _ = writeln!(s, "## Accuracy reduction p-values\n");
        let _ = writeln!(s, "One-sided Wilcoxon signed-rank over per-dataset mean accuracy, identity > transformed.\n");
        let _ = writeln!(s, "| classifier | transform | l | datasets | p |");
        let _ = writeln!(s, "|---|---|---|---|---|");
        for r in &self.pvalues {
            let p = r.p_value.map_or("n/a".to_string(), |p| format!("{p:.4e}"));
            let _ = writeln!(s, "| {} | {} | {} | {} | {} |", r.classifier, r.transform, r.l_fraction, r.n_datasets, p);
        }

        let _ = writeln!(s, "\n## Mean ranks\n");
        for e in &self.cliques {
            let cond = Condition {
                transform: e.transform.clone(),
                l_milli: l_milli(e.l_fraction),
            };
            let _ = writeln!(s, "**{}** ({} datasets)\n", cond.label(), e.n_datasets);
            let mut ranked = e.report.mean_ranks.clone();
            ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
            for (c, r) in ranked {
                let _ = writeln!(s, "- {c}: {r:.3}");
            }
            let groups: Vec<String> = e.report.cliques.iter().map(|c| format!("{{{}}}", c.join(", "))).collect();
            let _ = writeln!(s, "\nNo-significance groups: {}\n", groups.join(" "));
        }

        let _ = writeln!(s, "## Permutation filter\n");
        if self.verdicts.is_empty() {
            let _ = writeln!(s, "No permuted results.\n");
        } else {
            let _ = writeln!(s, "| classifier | flagged | datasets |");
            let _ = writeln!(s, "|---|---|---|");
            for c in &self.classifiers {
                let rows: Vec<&VerdictRow> = self.verdicts.iter().filter(|v| &v.classifier == c).collect();
                if rows.is_empty() {
                    continue;
                }
                let flagged = rows.iter().filter(|v| v.flagged).count();
                let _ = writeln!(s, "| {c} | {flagged} | {} |", rows.len());
            }
            s.push('\n');
        }

        if !self.warnings.is_empty() {
            let _ = writeln!(s, "## Warnings\n");
            for w in &self.warnings {
                let _ = writeln!(s, "- {w}");
            }
        }
        s
    }

    /// Tables plus `pvalues.svg`, `ranks.svg`, one scatter per classifier and
    /// transform, and `summary.md`.
    pub fn write_report(&self, out: &Path, opts: &ReportOptions) -> Result<()> {
        self.write_tables(out)?;
        fs::write(out.join("pvalues.svg"), self.pvalue_svg())?;
        fs::write(out.join("ranks.svg"), self.rank_svg())?;
        for set in &self.scatters {
            let name = format!("scatter_{}_{}.svg", set.classifier, set.condition.file_stem());
            fs::write(out.join(sanitize(&name)), self.scatter_svg(set))?;
        }
        fs::write(out.join("summary.md"), self.summary_markdown(opts))?;
        Ok(())
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "._-".contains(c) { c } else { '_' })
        .collect()
}

/// Statistical tables only.
pub fn emit_stats(results: &Path, out: &Path, opts: &ReportOptions) -> Result<StatsTables> {
    let tables = compute_tables(&read_results(results)?, opts)?;
    tables.write_tables(out)?;
    Ok(tables)
}

/// Full report: tables, SVG plots and `summary.md`.
pub fn emit_report(results: &Path, out: &Path, opts: &ReportOptions) -> Result<StatsTables> {
    let tables = compute_tables(&read_results(results)?, opts)?;
    tables.write_report(out, opts)?;
    Ok(tables)
}
