//! Stability of uncertainty estimates as the sample set grows.
//!
//! For each item the method is recomputed on the first `k` samples,
//! `k = 2..=N`, in generation order. Two summaries come out of those
//! prefix series: the mean relative step change (`delta`, lower is more
//! stable) and the mean Spearman correlation between the across-item
//! rankings at consecutive `k` (`spearmanr`, higher is more stable).

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::correlation::spearman;
use crate::methods::{uncertainty_at, Method, MethodError, MethodSettings};
use crate::response::ResponseSet;
use crate::similarity::SimilarityMatrix;

/// Added to the baseline magnitude in relative changes.
pub const CHANGE_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixSeries {
    pub item_id: String,
    pub method: Method,
    /// `values[i]` is the uncertainty on the first `i + 2` samples.
    pub values: Vec<f64>,
}

impl PrefixSeries {
    pub fn at(&self, k: usize) -> Option<f64> {
        k.checked_sub(2).and_then(|i| self.values.get(i)).copied()
    }
}

pub fn prefix_uncertainties(
    rs: &ResponseSet,
    method: Method,
    matrix: Option<&SimilarityMatrix>,
    settings: &MethodSettings,
) -> Result<PrefixSeries, MethodError> {
    let values = (2..=rs.n())
        .map(|k| uncertainty_at(method, rs, matrix, settings, k))
        .collect::<Result<_, _>>()?;
    Ok(PrefixSeries { item_id: rs.item_id().to_string(), method, values })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    /// `|u_{k+1} - u_k| / (|u_k| + ε)`
    #[default]
    Relative,
    /// `|u_{k+1} - u_k|`
    Absolute,
}

impl FromStr for DeltaMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relative" => Ok(Self::Relative),
            "absolute" => Ok(Self::Absolute),
            other => Err(format!("unknown delta mode `{other}`")),
        }
    }
}

/// Mean step change of a prefix series; `None` for a single-point series.
pub fn change_ratio(values: &[f64], mode: DeltaMode) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let steps = values.windows(2).map(|w| {
        let diff = (w[1] - w[0]).abs();
        match mode {
            DeltaMode::Relative => diff / (w[0].abs() + CHANGE_EPSILON),
            DeltaMode::Absolute => diff,
        }
    });
    Some(steps.sum::<f64>() / (values.len() - 1) as f64)
}

/// Mean over `k` of Spearman's rho between the across-item uncertainty
/// vectors at prefix `k` and `k + 1`. Only prefix sizes every item reaches
/// are used; steps where either ranking is constant are skipped.
pub fn stepwise_spearman(all_series: &[PrefixSeries]) -> Option<f64> {
    if all_series.len() < 3 {
        return None;
    }
    let len = all_series.iter().map(|s| s.values.len()).min()?;
    let column = |i: usize| -> Vec<f64> { all_series.iter().map(|s| s.values[i]).collect() };
    let rhos: Vec<f64> = (0..len.saturating_sub(1))
        .filter_map(|i| spearman(&column(i), &column(i + 1)))
        .collect();
    if rhos.is_empty() {
        return None;
    }
    Some(rhos.iter().sum::<f64>() / rhos.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StabilityResult {
    /// Mean over items of [`change_ratio`].
    pub delta: Option<f64>,
    pub spearmanr: Option<f64>,
    pub items: usize,
}

/// Stability of one method within one configuration.
pub fn stability(all_series: &[PrefixSeries], mode: DeltaMode) -> StabilityResult {
    let ratios: Vec<f64> = all_series.iter().filter_map(|s| change_ratio(&s.values, mode)).collect();
    let delta = (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64);
    StabilityResult { delta, spearmanr: stepwise_spearman(all_series), items: all_series.len() }
}
