//! Mean ranks across datasets and groups of classifiers with no pairwise
//! significant difference.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::wilcoxon::{wilcoxon_signed_rank, Alternative};

/// Run accuracies keyed by `(classifier, dataset)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMatrix {
    cells: BTreeMap<(String, String), Vec<f64>>,
}

impl RunMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, classifier: &str, dataset: &str, accuracy: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&accuracy) {
            return invalid(format!("accuracy {accuracy} outside [0, 1]"));
        }
        self.cells
            .entry((classifier.to_string(), dataset.to_string()))
            .or_default()
            .push(accuracy);
        Ok(())
    }

    pub fn runs(&self, classifier: &str, dataset: &str) -> Option<&[f64]> {
        self.cells
            .get(&(classifier.to_string(), dataset.to_string()))
            .map(|v| v.as_slice())
    }

    pub fn classifiers(&self) -> Vec<String> {
        let mut v: Vec<String> = self.cells.keys().map(|(c, _)| c.clone()).collect();
        v.dedup();
        v
    }

    pub fn datasets(&self) -> Vec<String> {
        let mut v: Vec<String> = self.cells.keys().map(|(_, d)| d.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Mean accuracy per cell, for the given classifier order.
    pub fn mean_table(&self, classifiers: &[String]) -> Result<AccuracyTable> {
        let datasets = self.datasets();
        let mut values = Vec::with_capacity(classifiers.len());
        for c in classifiers {
            let mut row = Vec::with_capacity(datasets.len());
            for d in &datasets {
                let Some(runs) = self.runs(c, d).filter(|r| !r.is_empty()) else {
                    return invalid(format!("missing cell ({c}, {d})"));
                };
                row.push(runs.iter().sum::<f64>() / runs.len() as f64);
            }
            values.push(row);
        }
        AccuracyTable::new(classifiers.to_vec(), datasets, values)
    }
}

/// Per-dataset mean accuracy; `values[classifier][dataset]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub classifiers: Vec<String>,
    pub datasets: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl AccuracyTable {
    pub fn new(classifiers: Vec<String>, datasets: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != classifiers.len() || values.iter().any(|r| r.len() != datasets.len()) {
            return invalid("accuracy table shape does not match its labels");
        }
        Ok(Self {
            classifiers,
            datasets,
            values,
        })
    }
}

/// Ranks of `scores` in descending order (1 = best), ties averaged.
pub fn descending_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        order[i..j].iter().for_each(|&k| ranks[k] = avg);
        i = j;
    }
    ranks
}

/// Mean over datasets of each classifier's per-dataset rank.
pub fn mean_ranks(table: &AccuracyTable) -> Result<Vec<f64>> {
    let k = table.classifiers.len();
    if k < 2 {
        return invalid("mean ranks need at least 2 classifiers");
    }
    if table.datasets.is_empty() {
        return invalid("mean ranks need at least 1 dataset");
    }
    let mut sums = vec![0.0; k];
    for d in 0..table.datasets.len() {
        let scores: Vec<f64> = table.values.iter().map(|row| row[d]).collect();
        for (s, r) in sums.iter_mut().zip(descending_ranks(&scores)) {
            *s += r;
        }
    }
    let nd = table.datasets.len() as f64;
    Ok(sums.into_iter().map(|s| s / nd).collect())
}

/// Holm step-down adjustment of a list of p-values.
pub fn holm_adjust(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p[i]).min(1.0));
        adjusted[i] = running;
    }
    adjusted
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub a: String,
    pub b: String,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliqueReport {
    pub mean_ranks: Vec<(String, f64)>,
    pub pairwise: Vec<PairwiseTest>,
    /// Maximal groups of mutually non-significant classifiers, members in
    /// mean-rank order, groups ordered by their best member's mean rank.
    pub cliques: Vec<Vec<String>>,
}

fn bron_kerbosch(adj: &[Vec<bool>], r: Vec<usize>, mut p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    while let Some(v) = p.pop() {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let x2 = x.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r2, p2, x2, out);
        x.push(v);
    }
}

/// Pairwise two-sided Wilcoxon tests on per-dataset accuracies; classifiers
/// are linked when `p >= alpha`. No multiplicity correction unless `holm`.
pub fn significance_cliques(table: &AccuracyTable, alpha: f64, holm: bool) -> Result<CliqueReport> {
    let k = table.classifiers.len();
    let ranks = mean_ranks(table)?;

    let mut pairs = Vec::new();
    let mut raw = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let r = wilcoxon_signed_rank(&table.values[i], &table.values[j], Alternative::TwoSided)?;
            pairs.push((i, j));
            raw.push(r.p_value);
        }
    }
    let used = if holm { holm_adjust(&raw) } else { raw };

    let mut adj = vec![vec![false; k]; k];
    let mut pairwise = Vec::with_capacity(pairs.len());
    for (&(i, j), &p) in pairs.iter().zip(&used) {
        let linked = p >= alpha;
        adj[i][j] = linked;
        adj[j][i] = linked;
        pairwise.push(PairwiseTest {
            a: table.classifiers[i].clone(),
            b: table.classifiers[j].clone(),
            p_value: p,
            significant: !linked,
        });
    }

    let mut found = Vec::new();
    bron_kerbosch(&adj, vec![], (0..k).rev().collect(), vec![], &mut found);
    let by_rank = |a: &usize, b: &usize| ranks[*a].total_cmp(&ranks[*b]).then(a.cmp(b));
    for c in found.iter_mut() {
        c.sort_by(by_rank);
    }
    found.sort_by(|a, b| {
        by_rank(&a[0], &b[0])
            .then_with(|| b.len().cmp(&a.len()))
            .then_with(|| a.cmp(b))
    });

    Ok(CliqueReport {
        mean_ranks: table
            .classifiers
            .iter()
            .cloned()
            .zip(ranks.iter().copied())
            .collect(),
        pairwise,
        cliques: found
            .into_iter()
            .map(|c| c.into_iter().map(|i| table.classifiers[i].clone()).collect())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(rows: Vec<Vec<f64>>) -> AccuracyTable {
        let k = rows.len();
        let d = rows[0].len();
        AccuracyTable::new(
            (0..k).map(|i| format!("c{i}")).collect(),
            (0..d).map(|i| format!("d{i}")).collect(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn tie_ranks() {
        assert_eq!(descending_ranks(&[0.9, 0.8, 0.9]), vec![1.5, 3.0, 1.5]);
    }

    #[test]
    fn strictly_best_classifier() {
        let t = table(vec![vec![0.9, 0.95, 0.99], vec![0.5, 0.6, 0.7], vec![0.8, 0.6, 0.1]]);
        let r = mean_ranks(&t).unwrap();
        assert_eq!(r[0], 1.0);
        assert!(mean_ranks(&table(vec![vec![0.5]])).is_err());
    }

    #[test]
    fn identical_classifiers_share_a_clique() {
        let v = vec![0.5, 0.7, 0.9, 0.6];
        let rep = significance_cliques(&table(vec![v.clone(), v]), 0.05, false).unwrap();
        assert_eq!(rep.cliques, vec![vec!["c0".to_string(), "c1".to_string()]]);
    }

    #[test]
    fn uniformly_dominated_classifier_is_separated() {
        let b: Vec<f64> = (0..30).map(|i| 0.3 + 0.015 * i as f64).collect();
        let a: Vec<f64> = b.iter().map(|x| x + 0.2).collect();
        let rep = significance_cliques(&table(vec![a, b]), 0.05, false).unwrap();
        assert_eq!(rep.cliques.len(), 2);
        assert!(rep.pairwise[0].significant);
        assert_eq!(rep.cliques[0], vec!["c0".to_string()]);
    }

    #[test]
    fn holm_adjustment() {
        let adj = holm_adjust(&[0.01, 0.04, 0.03]);
        assert!((adj[0] - 0.03).abs() < 1e-15);
        assert!((adj[2] - 0.06).abs() < 1e-15);
        assert!((adj[1] - 0.06).abs() < 1e-15);
    }

    #[test]
    fn run_matrix_means() {
        let mut m = RunMatrix::new();
        m.push("a", "x", 0.5).unwrap();
        m.push("a", "x", 0.7).unwrap();
        m.push("b", "x", 0.4).unwrap();
        assert!(m.push("b", "x", 1.5).is_err());
        let t = m.mean_table(&m.classifiers()).unwrap();
        assert!((t.values[0][0] - 0.6).abs() < 1e-15);
        m.push("a", "y", 0.1).unwrap();
        assert!(m.mean_table(&m.classifiers()).is_err());
    }

    proptest! {
        #[test]
        fn rank_sums_and_scale_invariance(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 2..6),
            scale in prop::sample::select(vec![0.5f64, 2.0, 4.0]),
        ) {
            let k = rows.len() as f64;
            for d in 0..4 {
                let scores: Vec<f64> = rows.iter().map(|r| r[d]).collect();
                let s: f64 = descending_ranks(&scores).iter().sum();
                prop_assert!((s - k * (k + 1.0) / 2.0).abs() < 1e-12);
            }
            let t = table(rows.clone());
            let scaled = table(rows.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect());
            prop_assert_eq!(mean_ranks(&t).unwrap(), mean_ranks(&scaled).unwrap());
        }

        #[test]
        fn cliques_cover_and_are_maximal(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 8), 2..6),
        ) {
            let t = table(rows);
            let rep = significance_cliques(&t, 0.05, false).unwrap();
            let linked = |a: &str, b: &str| rep.pairwise.iter().any(|p| {
                ((p.a == a && p.b == b) || (p.a == b && p.b == a)) && !p.significant
            });
            for c in &t.classifiers {
                prop_assert!(rep.cliques.iter().any(|q| q.contains(c)));
            }
            for q in &rep.cliques {
                for (i, a) in q.iter().enumerate() {
                    for b in &q[i + 1..] {
                        prop_assert!(linked(a, b));
                    }
                }
                for c in t.classifiers.iter().filter(|c| !q.contains(c)) {
                    prop_assert!(!q.iter().all(|m| linked(m, c)));
                }
            }
        }
    }
}
