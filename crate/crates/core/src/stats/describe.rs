use serde::{Deserialize, Serialize};

use super::{check_finite, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveSummary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
    pub iqr: f64,
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `(n − 1)·p`).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    check_finite(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile(&sorted, 0.5))
}

pub fn describe(values: &[f64]) -> Result<DescriptiveSummary, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    check_finite(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let q3 = quantile(&sorted, 0.75);
    Ok(DescriptiveSummary {
        n: sorted.len(),
        min: sorted[0],
        q1,
        median: quantile(&sorted, 0.5),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        q3,
        max: sorted[sorted.len() - 1],
        iqr: q3 - q1,
    })
}
