//! Statistical machinery: the permutation filter rule, Wilcoxon signed-rank
//! tests, mean ranks and significance cliques.

pub mod filter;
pub mod ranks;
pub mod wilcoxon;

pub use filter::{filter_verdict, temporal_filter_rule, RunSummary};
pub use ranks::{
    descending_ranks, holm_adjust, mean_ranks, significance_cliques, AccuracyTable, CliqueReport,
    PairwiseTest, RunMatrix,
};
pub use wilcoxon::{
    average_ranks, exact_tails, wilcoxon_normal_approx, wilcoxon_signed_rank, Alternative, Method,
    SignedRanks, WilcoxonResult,
};
