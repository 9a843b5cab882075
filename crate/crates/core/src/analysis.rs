//! Table-level benchmark steps: joining scores with predictions,
//! per-configuration effectiveness, stability and correlation, and the
//! rank tables built on top of them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::correlation::pearson_matrix;
use crate::effectiveness::{self, ScoredItem};
use crate::methods::Method;
use crate::pipeline::ScoreRow;
use crate::ranking::{aggregate_ranks, EvalMetric, RankTable};
use crate::response::{predict, ConfigKey, ParsedResponses, Prediction, PredictionRule};
use crate::stability::{stability, DeltaMode, PrefixSeries};
use crate::tables::{CorrelationRow, CurveKind, CurvePoint, EvalRow, StabilityRow};

fn group_by_config_method(rows: &[ScoreRow]) -> BTreeMap<(ConfigKey, Method), Vec<&ScoreRow>> {
    let mut groups: BTreeMap<(ConfigKey, Method), Vec<&ScoreRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.config.clone(), r.method)).or_default().push(r);
    }
    groups
}

#[derive(Debug, Clone, Default)]
pub struct EvalOutput {
    pub rows: Vec<EvalRow>,
    pub curves: Vec<CurvePoint>,
    /// Score rows with no response set, deduplicated, in first-seen order.
    pub unmatched: Vec<(ConfigKey, String)>,
}

pub fn evaluate_scores(rows: &[ScoreRow], responses: &ParsedResponses, rule: PredictionRule) -> EvalOutput {
    let predictions: HashMap<(&ConfigKey, &str), Prediction> = responses
        .iter()
        .map(|rs| ((rs.config(), rs.item_id()), predict(rs, rule)))
        .collect();
    let mut out = EvalOutput::default();
    let mut seen_unmatched = BTreeSet::new();
    for ((config, method), group) in group_by_config_method(rows) {
        let mut items = Vec::with_capacity(group.len());
        for r in group {
            match predictions.get(&(&r.config, r.item_id.as_str())) {
                Some(p) => items.push(ScoredItem::new(r.item_id.clone(), r.uncertainty, p.abs_error)),
                None => {
                    if seen_unmatched.insert((r.config.clone(), r.item_id.clone())) {
                        out.unmatched.push((r.config.clone(), r.item_id.clone()));
                    }
                }
            }
        }
        let curves: [(CurveKind, Option<Vec<(f64, f64)>>); 3] = [
            (CurveKind::Roc, effectiveness::roc_curve(&items)),
            (CurveKind::Arc, Some(effectiveness::accuracy_rejection_curve(&items))),
            (CurveKind::Erc, Some(effectiveness::error_rejection_curve(&items))),
        ];
        for (curve, points) in curves {
            for (x, y) in points.unwrap_or_default() {
                out.curves.push(CurvePoint { config: config.clone(), method, curve, x, y });
            }
        }
        out.rows.push(EvalRow { config, method, result: effectiveness::evaluate(&items) });
    }
    out
}

pub fn stability_rows(rows: &[ScoreRow], mode: DeltaMode) -> Vec<StabilityRow> {
    group_by_config_method(rows)
        .into_iter()
        .map(|((config, method), group)| {
            let series: Vec<PrefixSeries> = group
                .iter()
                .map(|r| PrefixSeries { item_id: r.item_id.clone(), method, values: r.prefix.clone() })
                .collect();
            StabilityRow { config, method, result: stability(&series, mode) }
        })
        .collect()
}

/// Long-form Pearson matrix per configuration, every ordered method pair.
pub fn correlation_rows(rows: &[ScoreRow]) -> Vec<CorrelationRow> {
    let mut by_config: BTreeMap<&ConfigKey, BTreeMap<Method, BTreeMap<String, f64>>> = BTreeMap::new();
    for r in rows {
        by_config
            .entry(&r.config)
            .or_default()
            .entry(r.method)
            .or_default()
            .insert(r.item_id.clone(), r.uncertainty);
    }
    let mut out = Vec::new();
    for (config, records) in by_config {
        for ((a, b), r) in pearson_matrix(&records) {
            out.push(CorrelationRow { config: config.clone(), method_a: a, method_b: b, pearson: r });
        }
    }
    out
}

/// Mean of the defined per-configuration coefficients for each pair.
pub fn mean_correlation(rows: &[CorrelationRow]) -> BTreeMap<(Method, Method), Option<f64>> {
    let mut acc: BTreeMap<(Method, Method), (f64, usize)> = BTreeMap::new();
    for r in rows {
        let e = acc.entry((r.method_a, r.method_b)).or_insert((0.0, 0));
        if let Some(v) = r.pearson {
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .map(|(k, (s, n))| (k, (n > 0).then(|| s / n as f64)))
        .collect()
}

/// Per-configuration metric values for every metric the rows carry.
pub fn metric_values(eval: &[EvalRow], stab: &[StabilityRow]) -> BTreeMap<(ConfigKey, EvalMetric), BTreeMap<Method, Option<f64>>> {
    let mut values: BTreeMap<(ConfigKey, EvalMetric), BTreeMap<Method, Option<f64>>> = BTreeMap::new();
    for r in eval {
        for metric in EvalMetric::EFFECTIVENESS {
            values.entry((r.config.clone(), metric)).or_default().insert(r.method, r.metric(metric));
        }
    }
    for r in stab {
        for metric in EvalMetric::STABILITY {
            values.entry((r.config.clone(), metric)).or_default().insert(r.method, r.metric(metric));
        }
    }
    values
}

pub fn rank_table(eval: &[EvalRow], stab: &[StabilityRow]) -> RankTable<ConfigKey, Method> {
    aggregate_ranks(&metric_values(eval, stab))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Perspective {
    Model,
    Question,
    Strategy,
}

impl Perspective {
    pub const ALL: [Perspective; 3] = [Perspective::Model, Perspective::Question, Perspective::Strategy];

    pub fn as_str(self) -> &'static str {
        match self {
            Perspective::Model => "model",
            Perspective::Question => "question",
            Perspective::Strategy => "strategy",
        }
    }

    pub fn of(self, c: &ConfigKey) -> String {
        match self {
            Perspective::Model => c.model.clone(),
            Perspective::Question => c.question.clone(),
            Perspective::Strategy => c.strategy.to_string(),
        }
    }
}

impl fmt::Display for Perspective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Perspective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Perspective::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown perspective `{s}`"))
    }
}

/// For each method, its average rank within each group of configurations
/// sharing a perspective value (one entry per group, groups in order).
pub fn perspective_ranks(
    table: &RankTable<ConfigKey, Method>,
    perspective: Perspective,
    metric: EvalMetric,
) -> BTreeMap<Method, Vec<f64>> {
    let mut groups: BTreeMap<String, BTreeMap<Method, (f64, usize)>> = BTreeMap::new();
    for ((config, m), ranks) in &table.per_config {
        if *m != metric {
            continue;
        }
        let g = groups.entry(perspective.of(config)).or_default();
        for (&method, &rank) in ranks {
            let e = g.entry(method).or_insert((0.0, 0));
            e.0 += rank;
            e.1 += 1;
        }
    }
    let mut out: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
    for by_method in groups.into_values() {
        for (method, (s, n)) in by_method {
            out.entry(method).or_default().push(s / n as f64);
        }
    }
    out
}
