//! Per-configuration ranking of methods and rank averaging across
//! configurations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::correlation::average_ranks;

/// Evaluation metrics that methods are ranked on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMetric {
    Auroc,
    CIndex,
    Auarc,
    Auerc,
    Delta,
    Spearmanr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

impl EvalMetric {
    pub const EFFECTIVENESS: [EvalMetric; 4] = [EvalMetric::Auroc, EvalMetric::CIndex, EvalMetric::Auarc, EvalMetric::Auerc];
    pub const STABILITY: [EvalMetric; 2] = [EvalMetric::Delta, EvalMetric::Spearmanr];

    pub fn direction(self) -> Direction {
        match self {
            EvalMetric::Auroc | EvalMetric::CIndex | EvalMetric::Auarc | EvalMetric::Spearmanr => Direction::HigherIsBetter,
            EvalMetric::Auerc | EvalMetric::Delta => Direction::LowerIsBetter,
        }
    }

    /// Column name in the CSV outputs.
    pub fn column(self) -> &'static str {
        match self {
            EvalMetric::Auroc => "auroc",
            EvalMetric::CIndex => "c_index",
            EvalMetric::Auarc => "auarc",
            EvalMetric::Auerc => "auerc",
            EvalMetric::Delta => "delta",
            EvalMetric::Spearmanr => "spearmanr",
        }
    }
}

impl fmt::Display for EvalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

impl FromStr for EvalMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EvalMetric::EFFECTIVENESS
            .into_iter()
            .chain(EvalMetric::STABILITY)
            .find(|m| m.column() == s)
            .ok_or_else(|| format!("unknown evaluation metric `{s}`"))
    }
}

/// Ranks (1 = best, ties averaged) of the present values for one metric.
pub fn rank_methods<M: Ord + Clone>(values: &BTreeMap<M, Option<f64>>, metric: EvalMetric) -> BTreeMap<M, f64> {
    let present: Vec<(&M, f64)> = values.iter().filter_map(|(m, v)| v.map(|v| (m, v))).collect();
    let keyed: Vec<f64> = present
        .iter()
        .map(|&(_, v)| match metric.direction() {
            Direction::HigherIsBetter => -v,
            Direction::LowerIsBetter => v,
        })
        .collect();
    present
        .iter()
        .zip(average_ranks(&keyed))
        .map(|(&(m, _), r)| (m.clone(), r))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankTable<C, M> {
    /// (configuration, metric) → method → rank.
    pub per_config: BTreeMap<(C, EvalMetric), BTreeMap<M, f64>>,
    /// metric → method → mean rank over configurations where it was ranked.
    pub aggregate: BTreeMap<EvalMetric, BTreeMap<M, f64>>,
}

/// `values` maps (configuration, metric) to each method's value, `None`
/// where the metric was undefined.
pub fn aggregate_ranks<C, M>(values: &BTreeMap<(C, EvalMetric), BTreeMap<M, Option<f64>>>) -> RankTable<C, M>
where
    C: Ord + Clone,
    M: Ord + Clone,
{
    let mut per_config = BTreeMap::new();
    let mut sums: BTreeMap<EvalMetric, BTreeMap<M, (f64, usize)>> = BTreeMap::new();
    for ((config, metric), by_method) in values {
        let ranks = rank_methods(by_method, *metric);
        let acc = sums.entry(*metric).or_default();
        for (m, &r) in &ranks {
            let e = acc.entry(m.clone()).or_insert((0.0, 0));
            e.0 += r;
            e.1 += 1;
        }
        per_config.insert((config.clone(), *metric), ranks);
    }
    let aggregate = sums
        .into_iter()
        .map(|(metric, acc)| (metric, acc.into_iter().map(|(m, (s, n))| (m, s / n as f64)).collect()))
        .collect();
    RankTable { per_config, aggregate }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(v: &[Option<f64>]) -> BTreeMap<usize, Option<f64>> {
        v.iter().copied().enumerate().collect()
    }

    #[test]
    fn descending_metric() {
        let r = rank_methods(&vals(&[Some(0.9), Some(0.8), Some(0.7)]), EvalMetric::Auroc);
        assert_eq!(r.values().copied().collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn ascending_metric_with_ties() {
        let r = rank_methods(&vals(&[Some(0.1), Some(0.1), Some(0.3)]), EvalMetric::Auerc);
        assert_eq!(r.values().copied().collect::<Vec<_>>(), vec![1.5, 1.5, 3.0]);
    }

    #[test]
    fn absent_values_are_not_ranked() {
        let r = rank_methods(&vals(&[None, Some(0.2), Some(0.3)]), EvalMetric::Delta);
        assert_eq!(r, BTreeMap::from([(1, 1.0), (2, 2.0)]));
    }

    #[test]
    fn aggregate_means_over_configs() {
        let mut v = BTreeMap::new();
        v.insert(("c1", EvalMetric::Auroc), vals(&[Some(0.9), Some(0.8)]));
        v.insert(("c2", EvalMetric::Auroc), vals(&[Some(0.6), Some(0.7)]));
        v.insert(("c3", EvalMetric::Auroc), vals(&[None, Some(0.7)]));
        let t = aggregate_ranks(&v);
        assert_eq!(t.per_config[&("c1", EvalMetric::Auroc)], BTreeMap::from([(0, 1.0), (1, 2.0)]));
        // Method 1: ranks 2, 1, 1 → 4/3; method 0: ranks 1, 2 → 1.5.
        assert_eq!(t.aggregate[&EvalMetric::Auroc][&0], 1.5);
        assert!((t.aggregate[&EvalMetric::Auroc][&1] - 4.0 / 3.0).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tie_free_ranks_sum(v in proptest::collection::btree_set(0u32..1000, 1..14)) {
                let values: BTreeMap<usize, Option<f64>> = v.iter().map(|&x| Some(x as f64 / 7.0)).enumerate().collect();
                let k = values.len() as f64;
                for metric in [EvalMetric::Auroc, EvalMetric::Delta] {
                    let sum: f64 = rank_methods(&values, metric).values().sum();
                    prop_assert_eq!(sum, k * (k + 1.0) / 2.0);
                }
            }

            #[test]
            fn ranks_invariant_under_increasing_transform(v in proptest::collection::vec(proptest::option::of(0.0f64..1.0), 1..14)) {
                let a = vals(&v);
                let b: BTreeMap<usize, Option<f64>> = a.iter().map(|(&k, x)| (k, x.map(|x| x.sqrt() * 5.0 + 1.0))).collect();
                prop_assert_eq!(rank_methods(&a, EvalMetric::Auroc), rank_methods(&b, EvalMetric::Auroc));
            }
        }
    }
}
