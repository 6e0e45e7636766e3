//! Descriptive summaries and the nonparametric test battery.
//!
//! All tests are two-sided. Rank-based tests use midranks for ties.

mod correlation;
mod describe;
mod normality;

pub use correlation::{pearson, pearson_p_value};
pub use describe::{describe, median, quantile, DescriptiveSummary};
pub use normality::shapiro_wilk;
pub use rank_tests::{dunn_pairwise, kruskal_wallis, wilcoxon_rank_sum, wilcoxon_rank_sum_with, Adjust, PMethod};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no observations")]
    Empty,
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("sample size {0} outside the supported range 3..=5000")]
    SampleSize(usize),
    #[error("all values are identical")]
    ZeroRange,
    #[error("zero variance")]
    ZeroVariance,
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("non-finite value")]
    NonFinite,
    #[error("exact p-value needs untied data and at most {0} observations")]
    ExactUnavailable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    ShapiroWilk,
    WilcoxonRankSum,
    KruskalWallis,
    Pearson,
    DunnPair,
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TestKind::ShapiroWilk => "shapiro_wilk",
            TestKind::WilcoxonRankSum => "wilcoxon_rank_sum",
            TestKind::KruskalWallis => "kruskal_wallis",
            TestKind::Pearson => "pearson",
            TestKind::DunnPair => "dunn_pair",
        })
    }
}

/// Output of one hypothesis test.
///
/// `statistic` is W for Shapiro-Wilk and Wilcoxon, H for Kruskal-Wallis,
/// t for Pearson and z for a Dunn pair. `effect_size` is r for Wilcoxon
/// and Pearson, η²\[H\] for Kruskal-Wallis and Dunn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    pub effect_size: Option<f64>,
    pub group_labels: Vec<String>,
    pub n: usize,
}

impl TestResult {
    /// Replaces positional labels ("0", "1", ...) with names.
    pub fn relabel<S: AsRef<str>>(mut self, names: &[S]) -> Self {
        for label in &mut self.group_labels {
            if let Some(name) = label.parse::<usize>().ok().and_then(|i| names.get(i)) {
                *label = name.as_ref().to_string();
            }
        }
        self
    }
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

/// Midranks (1-based) of the pooled values, plus Σ(t³ − t) over tie groups.
pub(crate) fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (ranks, ties)
}
