//! Per-item uncertainty computation over a parsed corpus.
//!
//! Matrices come from the local Jaccard path, a precomputed store, or a
//! similarity engine, in that order of preference. Provider traffic for a
//! kind is issued up front; if it fails, every method of that kind is
//! dropped and the failure is reported, while the other kinds still emit.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::methods::{Method, MethodSettings};
use crate::response::{ConfigKey, ResponseSet};
use crate::similarity::precomputed::PrecomputedStore;
use crate::similarity::{build_matrix, SimilarityEngine, SimilarityKind, SimilarityMatrix};
use crate::stability::prefix_uncertainties;

/// One output row: an item's uncertainty under one method, with the
/// prefix series `u_2..u_N` (the last entry equals `uncertainty`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub config: ConfigKey,
    pub item_id: String,
    pub method: Method,
    pub uncertainty: f64,
    pub prefix: Vec<f64>,
}

#[derive(Clone, Copy, Default)]
pub struct MatrixSources<'a> {
    pub engine: Option<&'a SimilarityEngine<'a>>,
    pub precomputed: Option<&'a PrecomputedStore>,
}

impl<'a> MatrixSources<'a> {
    /// Whether some source can serve `kind` at all.
    pub fn covers(&self, kind: SimilarityKind) -> bool {
        kind == SimilarityKind::Jaccard
            || self.engine.is_some()
            || self.precomputed.is_some_and(|s| s.has_kind(kind))
    }

    fn precomputed_for(&self, rs: &ResponseSet, kind: SimilarityKind) -> Option<&'a SimilarityMatrix> {
        self.precomputed.and_then(|s| s.get(rs, kind))
    }

    pub fn matrix(&self, rs: &ResponseSet, kind: SimilarityKind) -> Result<SimilarityMatrix, String> {
        if let Some(m) = self.precomputed_for(rs, kind) {
            return Ok(m.clone());
        }
        if kind != SimilarityKind::Jaccard && self.engine.is_none() {
            return Err(format!("no precomputed {kind} matrix for item `{}` and no provider configured", rs.item_id()));
        }
        build_matrix(rs, kind, self.engine).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ComputeOutput {
    /// Sets in input order, methods in canonical order within each set.
    pub rows: Vec<ScoreRow>,
    /// Kinds whose methods were dropped, with the first failure seen.
    pub failed: BTreeMap<SimilarityKind, String>,
}

pub fn compute(
    sets: &[&ResponseSet],
    methods: &[Method],
    sources: MatrixSources<'_>,
    settings: &MethodSettings,
) -> ComputeOutput {
    let methods: Vec<Method> = methods.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let kinds: BTreeSet<SimilarityKind> = methods.iter().filter_map(|m| m.similarity_kind()).collect();
    let mut failed = BTreeMap::new();

    if let Some(engine) = sources.engine {
        for &kind in kinds.iter().filter(|&&k| k != SimilarityKind::Jaccard) {
            let pending = sets.iter().copied().filter(|rs| sources.precomputed_for(rs, kind).is_none());
            if let Err(e) = engine.prefetch_sets(pending, kind) {
                log::error!("{kind} provider failed: {e}");
                failed.insert(kind, e.to_string());
            }
        }
    }

    let per_set: Vec<(Vec<ScoreRow>, Vec<(SimilarityKind, String)>)> = sets
        .par_iter()
        .map(|rs| {
            let mut matrices = BTreeMap::new();
            let mut errors = Vec::new();
            for &kind in kinds.iter().filter(|k| !failed.contains_key(k)) {
                match sources.matrix(rs, kind) {
                    Ok(m) => {
                        matrices.insert(kind, m);
                    }
                    Err(e) => errors.push((kind, e)),
                }
            }
            let mut rows = Vec::new();
            for &method in &methods {
                let matrix = match method.similarity_kind() {
                    None => None,
                    Some(kind) => match matrices.get(&kind) {
                        Some(m) => Some(m),
                        None => continue,
                    },
                };
                match prefix_uncertainties(rs, method, matrix, settings) {
                    Ok(series) => rows.push(ScoreRow {
                        config: rs.config().clone(),
                        item_id: rs.item_id().to_string(),
                        method,
                        uncertainty: *series.values.last().expect("N >= 2"),
                        prefix: series.values,
                    }),
                    Err(e) => {
                        let kind = method.similarity_kind().expect("categorical methods cannot fail");
                        errors.push((kind, format!("item `{}`: {e}", rs.item_id())));
                    }
                }
            }
            (rows, errors)
        })
        .collect();

    for (_, errors) in &per_set {
        for (kind, e) in errors {
            failed.entry(*kind).or_insert_with(|| {
                log::error!("{kind} similarity failed: {e}");
                e.clone()
            });
        }
    }
    let rows = per_set
        .into_iter()
        .flat_map(|(rows, _)| rows)
        .filter(|r| r.method.similarity_kind().is_none_or(|k| !failed.contains_key(&k)))
        .collect();
    ComputeOutput { rows, failed }
}
