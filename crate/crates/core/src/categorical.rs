//! Frequency-based uncertainty over the discrete score labels of a response
//! set: Numset, MAR, categorical entropy (CE) and first–second distance (FSD).
//!
//! A sample whose score could not be recovered contributes to its own
//! [`Label::Invalid`] category.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Score(i64),
    Invalid,
}

impl From<Option<i64>> for Label {
    fn from(score: Option<i64>) -> Self {
        score.map_or(Label::Invalid, Label::Score)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Score(s) => write!(f, "{s}"),
            Label::Invalid => f.write_str("INVALID"),
        }
    }
}

/// Counts per observed label. Only labels with a positive count are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelHistogram {
    counts: BTreeMap<Label, usize>,
    total: usize,
}

impl LabelHistogram {
    pub fn from_labels<I, L>(labels: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<Label>,
    {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for label in labels {
            *counts.entry(label.into()).or_insert(0) += 1;
            total += 1;
        }
        Self { counts, total }
    }

    pub fn from_counts(counts: impl IntoIterator<Item = (Label, usize)>) -> Self {
        let mut map = BTreeMap::new();
        for (label, count) in counts {
            if count > 0 {
                *map.entry(label).or_insert(0) += count;
            }
        }
        let total = map.values().sum();
        Self { counts: map, total }
    }

    pub fn counts(&self) -> &BTreeMap<Label, usize> {
        &self.counts
    }

    /// Number of samples `N`.
    pub fn total(&self) -> usize {
        self.total
    }

    /// Counts sorted descending.
    fn sorted_counts(&self) -> Vec<usize> {
        let mut counts: Vec<usize> = self.counts.values().copied().collect();
        counts.sort_unstable_by(|a, b| b.cmp(a));
        counts
    }
}

/// Number of distinct labels observed.
pub fn numset(h: &LabelHistogram) -> f64 {
    h.counts.len() as f64
}

/// One minus the share of the most frequent label.
pub fn mar(h: &LabelHistogram) -> f64 {
    let top = h.counts.values().copied().max().unwrap_or(0);
    1.0 - top as f64 / h.total as f64
}

/// Shannon entropy (natural log) of the label frequencies.
pub fn categorical_entropy(h: &LabelHistogram) -> f64 {
    entropy_of_counts(h.counts.values().copied(), h.total)
}

/// One minus the gap between the two largest label shares. A single
/// observed label counts as a runner-up of zero.
pub fn fsd(h: &LabelHistogram) -> f64 {
    let sorted = h.sorted_counts();
    let first = sorted.first().copied().unwrap_or(0);
    let second = sorted.get(1).copied().unwrap_or(0);
    1.0 - (first - second) as f64 / h.total as f64
}

/// `-Σ p ln p` over `counts / total`, skipping empty cells.
pub(crate) fn entropy_of_counts(counts: impl IntoIterator<Item = usize>, total: usize) -> f64 {
    let n = total as f64;
    let h: f64 = counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    // A single cell gives -1·ln 1 = -0.0; normalize the sign.
    h.max(0.0)
}
