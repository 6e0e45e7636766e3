use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::RecordScore;
use crate::corpus::Corpus;
use crate::stats::median;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryMedian {
    pub country: String,
    pub n: usize,
    pub median_fkgl: f64,
    pub median_yules_k: f64,
    /// True when `n` is below the configured minimum.
    pub below_min_n: bool,
}

/// Median scores per publisher country, sorted by country code. Records
/// without a country or without a score are left out.
pub fn country_medians(corpus: &Corpus, scores: &[RecordScore], min_n: usize) -> Vec<CountryMedian> {
    let by_id: HashMap<&str, &RecordScore> = scores.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut groups: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in &corpus.records {
        if let (Some(country), Some(s)) = (r.publisher_country.as_deref(), by_id.get(r.id.as_str())) {
            let entry = groups.entry(country).or_default();
            entry.0.push(s.fkgl);
            entry.1.push(s.yules_k);
        }
    }
    groups
        .into_iter()
        .map(|(country, (fkgl, k))| CountryMedian {
            country: country.to_string(),
            n: fkgl.len(),
            median_fkgl: median(&fkgl).expect("nonempty finite group"),
            median_yules_k: median(&k).expect("nonempty finite group"),
            below_min_n: fkgl.len() < min_n,
        })
        .collect()
}
