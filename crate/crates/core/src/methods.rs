//! The fourteen benchmarked uncertainty methods and a single entry point to
//! evaluate any of them on a response set (or a prefix of it).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::categorical::{self, LabelHistogram};
use crate::graph::{self, GraphError, RelationGraph, DEFAULT_DSE_THRESHOLD};
use crate::response::ResponseSet;
use crate::similarity::{SimilarityKind, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GraphMeasure {
    Nad,
    Ge,
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    Ce,
    Fsd,
    Mar,
    Numset,
    Graph(SimilarityKind, GraphMeasure),
    NliDse,
}

impl Method {
    /// Canonical reporting order.
    pub const ALL: [Method; 14] = [
        Method::Ce,
        Method::Fsd,
        Method::Mar,
        Method::Numset,
        Method::Graph(SimilarityKind::Jaccard, GraphMeasure::Nad),
        Method::Graph(SimilarityKind::Jaccard, GraphMeasure::Ge),
        Method::Graph(SimilarityKind::Jaccard, GraphMeasure::Eigen),
        Method::Graph(SimilarityKind::Nli, GraphMeasure::Nad),
        Method::Graph(SimilarityKind::Nli, GraphMeasure::Ge),
        Method::Graph(SimilarityKind::Nli, GraphMeasure::Eigen),
        Method::NliDse,
        Method::Graph(SimilarityKind::Embed, GraphMeasure::Nad),
        Method::Graph(SimilarityKind::Embed, GraphMeasure::Ge),
        Method::Graph(SimilarityKind::Embed, GraphMeasure::Eigen),
    ];

    pub const CATEGORICAL: [Method; 4] = [Method::Ce, Method::Fsd, Method::Mar, Method::Numset];

    pub fn name(self) -> &'static str {
        use GraphMeasure::*;
        use SimilarityKind::*;
        match self {
            Method::Ce => "ce",
            Method::Fsd => "fsd",
            Method::Mar => "mar",
            Method::Numset => "numset",
            Method::Graph(Jaccard, Nad) => "js_nad",
            Method::Graph(Jaccard, Ge) => "js_ge",
            Method::Graph(Jaccard, Eigen) => "js_eigen",
            Method::Graph(Nli, Nad) => "nli_nad",
            Method::Graph(Nli, Ge) => "nli_ge",
            Method::Graph(Nli, Eigen) => "nli_eigen",
            Method::NliDse => "nli_dse",
            Method::Graph(Embed, Nad) => "embed_nad",
            Method::Graph(Embed, Ge) => "embed_ge",
            Method::Graph(Embed, Eigen) => "embed_eigen",
        }
    }

    /// Relation kind the method is computed over, if any.
    pub fn similarity_kind(self) -> Option<SimilarityKind> {
        match self {
            Method::Graph(kind, _) => Some(kind),
            Method::NliDse => Some(SimilarityKind::Nli),
            _ => None,
        }
    }

    pub fn is_categorical(self) -> bool {
        self.similarity_kind().is_none()
    }

    fn position(self) -> usize {
        Method::ALL.iter().position(|&m| m == self).expect("every method is listed")
    }

    /// Every method over the given kinds, plus the categorical ones.
    pub fn for_kinds(kinds: &[SimilarityKind]) -> Vec<Method> {
        Method::ALL
            .into_iter()
            .filter(|m| m.similarity_kind().is_none_or(|k| kinds.contains(&k)))
            .collect()
    }
}

impl PartialOrd for Method {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Method {
    fn cmp(&self, other: &Self) -> Ordering {
        self.position().cmp(&other.position())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| format!("unknown method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub dse_threshold: f64,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self { dse_threshold: DEFAULT_DSE_THRESHOLD }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MethodError {
    #[error("{method} needs a {kind} similarity matrix")]
    MissingMatrix { method: Method, kind: SimilarityKind },
    #[error("{method} got a {got} matrix, expected {expected}")]
    WrongKind { method: Method, expected: SimilarityKind, got: SimilarityKind },
    #[error("{method}: matrix is {got}×{got} but the response set has {expected} samples")]
    SizeMismatch { method: Method, expected: usize, got: usize },
    #[error("{method}: {source}")]
    Graph { method: Method, source: GraphError },
}

/// Uncertainty of `method` on the first `k` samples of `rs` (`2 <= k <= N`).
/// Relation methods use the leading `k × k` block of `matrix`.
pub fn uncertainty_at(
    method: Method,
    rs: &ResponseSet,
    matrix: Option<&SimilarityMatrix>,
    settings: &MethodSettings,
    k: usize,
) -> Result<f64, MethodError> {
    assert!((2..=rs.n()).contains(&k), "prefix size {k} outside 2..={}", rs.n());
    let Some(kind) = method.similarity_kind() else {
        let h = LabelHistogram::from_labels(rs.scores().take(k));
        return Ok(match method {
            Method::Ce => categorical::categorical_entropy(&h),
            Method::Fsd => categorical::fsd(&h),
            Method::Mar => categorical::mar(&h),
            Method::Numset => categorical::numset(&h),
            _ => unreachable!("relation methods have a kind"),
        });
    };

    let matrix = matrix.ok_or(MethodError::MissingMatrix { method, kind })?;
    if matrix.kind() != kind {
        return Err(MethodError::WrongKind { method, expected: kind, got: matrix.kind() });
    }
    if matrix.n() != rs.n() {
        return Err(MethodError::SizeMismatch { method, expected: rs.n(), got: matrix.n() });
    }
    let sub = if k == matrix.n() { matrix.clone() } else { matrix.leading(k) };
    let g = RelationGraph::new(sub);
    let graph_err = |source| MethodError::Graph { method, source };
    Ok(match method {
        Method::Graph(_, GraphMeasure::Nad) => graph::nad(&g),
        Method::Graph(_, GraphMeasure::Ge) => graph::eccentricity(&g),
        Method::Graph(_, GraphMeasure::Eigen) => graph::algebraic_connectivity_uncertainty(&g).map_err(graph_err)?.value,
        Method::NliDse => {
            let clusters = graph::semantic_clusters(&g, settings.dse_threshold).map_err(graph_err)?;
            graph::discrete_semantic_entropy(&clusters, k)
        }
        _ => unreachable!("categorical methods handled above"),
    })
}

/// Uncertainty of `method` on the whole response set.
pub fn uncertainty(
    method: Method,
    rs: &ResponseSet,
    matrix: Option<&SimilarityMatrix>,
    settings: &MethodSettings,
) -> Result<f64, MethodError> {
    uncertainty_at(method, rs, matrix, settings, rs.n())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::{ConfigKey, Strategy};

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("JS_NAD".parse::<Method>().unwrap(), Method::Graph(SimilarityKind::Jaccard, GraphMeasure::Nad));
        assert!("nli_foo".parse::<Method>().is_err());
        let mut sorted = Method::ALL.to_vec();
        sorted.reverse();
        sorted.sort();
        assert_eq!(sorted, Method::ALL.to_vec());
    }

    #[test]
    fn for_kinds_filters() {
        assert_eq!(Method::for_kinds(&[]), Method::CATEGORICAL.to_vec());
        assert_eq!(Method::for_kinds(&[SimilarityKind::Nli]).len(), 8);
        assert_eq!(Method::for_kinds(&SimilarityKind::ALL).len(), 14);
    }

    #[test]
    fn relation_methods_need_matching_matrix() {
        let rs = ResponseSet::from_scores("a", ConfigKey::new("m", "q", Strategy::ZeroShot), 1, (0, 3), &[Some(1); 3])
            .unwrap();
        let s = MethodSettings::default();
        let dse = Method::NliDse;
        assert!(matches!(uncertainty(dse, &rs, None, &s), Err(MethodError::MissingMatrix { .. })));
        let jac = SimilarityMatrix::from_rows(SimilarityKind::Jaccard, vec![vec![1.0; 3]; 3]).unwrap();
        assert!(matches!(uncertainty(dse, &rs, Some(&jac), &s), Err(MethodError::WrongKind { .. })));
        let small = SimilarityMatrix::from_rows(SimilarityKind::Jaccard, vec![vec![1.0; 2]; 2]).unwrap();
        let js = Method::Graph(SimilarityKind::Jaccard, GraphMeasure::Nad);
        assert!(matches!(uncertainty(js, &rs, Some(&small), &s), Err(MethodError::SizeMismatch { .. })));
        assert_eq!(uncertainty(js, &rs, Some(&jac), &s).unwrap(), 0.0);
    }
}
