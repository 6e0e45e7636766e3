use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::RecordScore;
use crate::corpus::{Corpus, GroupKey, GroupLabel};
use crate::stats::{
    describe, dunn_pairwise, kruskal_wallis, pearson, shapiro_wilk, wilcoxon_rank_sum, Adjust, DescriptiveSummary,
    StatsError, TestResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMetric {
    Fkgl,
    YulesK,
}

impl ScoreMetric {
    pub const ALL: [ScoreMetric; 2] = [ScoreMetric::Fkgl, ScoreMetric::YulesK];

    fn of(self, s: &RecordScore) -> f64 {
        match self {
            ScoreMetric::Fkgl => s.fkgl,
            ScoreMetric::YulesK => s.yules_k,
        }
    }
}

impl fmt::Display for ScoreMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreMetric::Fkgl => "fkgl",
            ScoreMetric::YulesK => "yules_k",
        })
    }
}

/// Summary of one metric over all records (`scope = "all"`) or one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: ScoreMetric,
    pub scope: String,
    pub group: Option<String>,
    pub summary: DescriptiveSummary,
}

/// One test with what it was run on. `scope` is "all", a group key, or
/// `key=label` for a single group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub scope: String,
    pub metric: String,
    pub result: TestResult,
}

/// Scored values of each group, in group-label order.
fn grouped<'a>(
    corpus: &Corpus,
    scores: &'a [RecordScore],
    key: GroupKey,
) -> BTreeMap<GroupLabel, Vec<&'a RecordScore>> {
    let by_id: HashMap<&str, &RecordScore> = scores.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut groups: BTreeMap<GroupLabel, Vec<&RecordScore>> = BTreeMap::new();
    for r in &corpus.records {
        if let Some(s) = by_id.get(r.id.as_str()) {
            groups.entry(key.label(r)).or_default().push(s);
        }
    }
    groups
}

fn values(scores: &[&RecordScore], metric: ScoreMetric) -> Vec<f64> {
    scores.iter().map(|s| metric.of(s)).collect()
}

/// Descriptive summaries per metric, overall and per group (including the
/// "missing" bucket).
pub fn summarize(corpus: &Corpus, scores: &[RecordScore], keys: &[GroupKey]) -> Result<Vec<SummaryRow>, StatsError> {
    let all: Vec<&RecordScore> = scores.iter().collect();
    let mut rows = Vec::new();
    for metric in ScoreMetric::ALL {
        rows.push(SummaryRow {
            metric,
            scope: "all".into(),
            group: None,
            summary: describe(&values(&all, metric))?,
        });
        for &key in keys {
            for (label, members) in grouped(corpus, scores, key) {
                rows.push(SummaryRow {
                    metric,
                    scope: key.to_string(),
                    group: Some(label.to_string()),
                    summary: describe(&values(&members, metric))?,
                });
            }
        }
    }
    Ok(rows)
}

fn shapiro_row(scope: String, metric: ScoreMetric, data: &[f64], notes: &mut Vec<String>) -> Option<TestRow> {
    match shapiro_wilk(data) {
        Ok(result) => Some(TestRow {
            scope,
            metric: metric.to_string(),
            result,
        }),
        Err(e @ (StatsError::SampleSize(_) | StatsError::ZeroRange)) => {
            notes.push(format!("shapiro_wilk skipped for {scope} {metric}: {e}"));
            None
        }
        Err(e) => {
            notes.push(format!("shapiro_wilk failed for {scope} {metric}: {e}"));
            None
        }
    }
}

/// The test battery: FKGL~K correlation, normality per metric and group,
/// then Wilcoxon (two groups) or Kruskal-Wallis with Dunn pairs (three or
/// more) for every key. Records with a missing key value are left out of
/// group comparisons.
pub fn compare_groups(
    corpus: &Corpus,
    scores: &[RecordScore],
    keys: &[GroupKey],
    adjust: Adjust,
) -> Result<(Vec<TestRow>, Vec<String>), StatsError> {
    let mut tests = Vec::new();
    let mut notes = Vec::new();
    let all: Vec<&RecordScore> = scores.iter().collect();

    match pearson(&values(&all, ScoreMetric::Fkgl), &values(&all, ScoreMetric::YulesK)) {
        Ok(result) => tests.push(TestRow {
            scope: "all".into(),
            metric: "fkgl~yules_k".into(),
            result,
        }),
        Err(e @ (StatsError::TooFew { .. } | StatsError::ZeroVariance)) => {
            notes.push(format!("pearson skipped: {e}"));
        }
        Err(e) => return Err(e),
    }
    for metric in ScoreMetric::ALL {
        tests.extend(shapiro_row("all".into(), metric, &values(&all, metric), &mut notes));
    }

    for &key in keys {
        let groups: Vec<(String, Vec<&RecordScore>)> = grouped(corpus, scores, key)
            .into_iter()
            .filter_map(|(label, members)| match label {
                GroupLabel::Value(v) => Some((v, members)),
                GroupLabel::Missing => None,
            })
            .collect();
        if groups.len() < 2 {
            notes.push(format!(
                "{key}: insufficient groups ({} group(s) with data), comparisons skipped",
                groups.len()
            ));
            continue;
        }
        let names: Vec<&str> = groups.iter().map(|(n, _)| n.as_str()).collect();
        for metric in ScoreMetric::ALL {
            let data: Vec<Vec<f64>> = groups.iter().map(|(_, m)| values(m, metric)).collect();
            for (name, d) in names.iter().zip(&data) {
                tests.extend(shapiro_row(format!("{key}={name}"), metric, d, &mut notes));
            }
            let row = |result: TestResult| TestRow {
                scope: key.to_string(),
                metric: metric.to_string(),
                result: result.relabel(&names),
            };
            if data.len() == 2 {
                tests.push(row(wilcoxon_rank_sum(&data[0], &data[1])?));
            } else {
                tests.push(row(kruskal_wallis(&data)?));
                for pair in dunn_pairwise(&data, adjust)? {
                    tests.push(row(pair));
                }
            }
        }
    }
    Ok((tests, notes))
}
