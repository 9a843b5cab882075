//! How well an uncertainty score flags unreliable grades.
//!
//! * AUROC: probability that an incorrect item carries higher uncertainty
//!   than a correct one (ties count one half).
//! * C-index: the same concordance over all item pairs whose absolute
//!   errors differ, so larger errors should carry higher uncertainty.
//! * AUARC / AUERC: area under the retained-accuracy (resp. retained mean
//!   absolute error) curve as the most uncertain items are rejected one by
//!   one, on the grid `r_j = j/m`, `j = 0..m-1`, trapezoid rule, divided by
//!   the grid span `(m-1)/m`.
//!
//! Curve orderings break uncertainty ties by `item_id`, so results do not
//! depend on input order.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub item_id: String,
    pub uncertainty: f64,
    pub correct: bool,
    pub abs_error: u64,
}

impl ScoredItem {
    pub fn new(item_id: impl Into<String>, uncertainty: f64, abs_error: u64) -> Self {
        Self { item_id: item_id.into(), uncertainty, correct: abs_error == 0, abs_error }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EffectivenessResult {
    pub auroc: Option<f64>,
    pub c_index: Option<f64>,
    pub auarc: Option<f64>,
    pub auerc: Option<f64>,
    pub m: usize,
}

pub fn evaluate(items: &[ScoredItem]) -> EffectivenessResult {
    EffectivenessResult {
        auroc: auroc(items),
        c_index: c_index(items),
        auarc: auarc(items),
        auerc: auerc(items),
        m: items.len(),
    }
}

/// Credit of `high` over `low` summed over all cross pairs: 1 when the
/// `high` value is larger, 1/2 on ties.
fn cross_pair_wins(high: &[f64], low: &[f64]) -> f64 {
    let mut sorted = low.to_vec();
    sorted.sort_by(f64::total_cmp);
    high.iter()
        .map(|&x| {
            let below = sorted.partition_point(|&y| y < x);
            let not_above = sorted.partition_point(|&y| y <= x);
            below as f64 + 0.5 * (not_above - below) as f64
        })
        .sum()
}

/// `None` unless both correct and incorrect items are present.
pub fn auroc(items: &[ScoredItem]) -> Option<f64> {
    let (wrong, right): (Vec<&ScoredItem>, Vec<&ScoredItem>) = items.iter().partition(|it| !it.correct);
    if wrong.is_empty() || right.is_empty() {
        log::debug!("AUROC undefined: {} incorrect, {} correct", wrong.len(), right.len());
        return None;
    }
    let wrong: Vec<f64> = wrong.iter().map(|it| it.uncertainty).collect();
    let right: Vec<f64> = right.iter().map(|it| it.uncertainty).collect();
    Some(cross_pair_wins(&wrong, &right) / (wrong.len() * right.len()) as f64)
}

/// `None` when every item has the same absolute error.
pub fn c_index(items: &[ScoredItem]) -> Option<f64> {
    let mut by_error: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for it in items {
        by_error.entry(it.abs_error).or_default().push(it.uncertainty);
    }
    if by_error.len() < 2 {
        log::debug!("C-index undefined: all absolute errors equal");
        return None;
    }
    let levels: Vec<&Vec<f64>> = by_error.values().collect();
    let (mut wins, mut pairs) = (0.0, 0usize);
    for (hi_idx, high) in levels.iter().enumerate() {
        for low in &levels[..hi_idx] {
            wins += cross_pair_wins(high, low);
            pairs += high.len() * low.len();
        }
    }
    Some(wins / pairs as f64)
}

/// Items ordered from least to most uncertain, ties by `item_id`.
fn retention_order(items: &[ScoredItem]) -> Vec<&ScoredItem> {
    let mut sorted: Vec<&ScoredItem> = items.iter().collect();
    sorted.sort_by(|a, b| {
        a.uncertainty
            .total_cmp(&b.uncertainty)
            .then_with(|| a.item_id.cmp(&b.item_id))
    });
    sorted
}

/// Points `(j/m, mean of value over the m-j least uncertain items)` for
/// `j = 0..m-1`.
fn rejection_curve(items: &[ScoredItem], value: impl Fn(&ScoredItem) -> f64) -> Vec<(f64, f64)> {
    let order = retention_order(items);
    let m = order.len();
    let mut prefix = Vec::with_capacity(m + 1);
    prefix.push(0.0);
    for it in &order {
        prefix.push(prefix.last().unwrap() + value(it));
    }
    (0..m)
        .map(|j| {
            let kept = m - j;
            (j as f64 / m as f64, prefix[kept] / kept as f64)
        })
        .collect()
}

pub fn accuracy_rejection_curve(items: &[ScoredItem]) -> Vec<(f64, f64)> {
    rejection_curve(items, |it| if it.correct { 1.0 } else { 0.0 })
}

pub fn error_rejection_curve(items: &[ScoredItem]) -> Vec<(f64, f64)> {
    rejection_curve(items, |it| it.abs_error as f64)
}

/// Trapezoid area over the curve divided by its x-span.
fn normalized_area(curve: &[(f64, f64)]) -> Option<f64> {
    if curve.len() < 2 {
        return None;
    }
    let area: f64 = curve.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
    let span = curve.last().unwrap().0 - curve[0].0;
    Some(area / span)
}

/// `None` for fewer than two items.
pub fn auarc(items: &[ScoredItem]) -> Option<f64> {
    normalized_area(&accuracy_rejection_curve(items))
}

/// `None` for fewer than two items. Lower is better.
pub fn auerc(items: &[ScoredItem]) -> Option<f64> {
    normalized_area(&error_rejection_curve(items))
}

/// ROC points `(false-positive rate, true-positive rate)` with incorrect
/// items as positives, sweeping the threshold down through each distinct
/// uncertainty. Starts at (0,0) and ends at (1,1).
pub fn roc_curve(items: &[ScoredItem]) -> Option<Vec<(f64, f64)>> {
    let positives = items.iter().filter(|it| !it.correct).count();
    let negatives = items.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut sorted: Vec<&ScoredItem> = items.iter().collect();
    sorted.sort_by(|a, b| b.uncertainty.total_cmp(&a.uncertainty));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let u = sorted[i].uncertainty;
        while i < sorted.len() && sorted[i].uncertainty.total_cmp(&u) == Ordering::Equal {
            if sorted[i].correct {
                fp += 1;
            } else {
                tp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / negatives as f64, tp as f64 / positives as f64));
    }
    Some(points)
}
