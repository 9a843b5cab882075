//! Precomputed similarity matrices stored as JSON files.
//!
//! ```json
//! {"item_id": "a17", "kind": "nli", "n": 5, "values": [[...]], "directed": [[...]]}
//! ```
//!
//! `directed` is required for `nli` and forbidden otherwise. In a directory
//! store, `item_id` may be the bare item id or the configuration-qualified
//! form `model|question|strategy|item_id`; the qualified form wins when both
//! exist.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{MatrixError, SimilarityKind, SimilarityMatrix};
use crate::response::ResponseSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecomputedFile {
    pub item_id: String,
    pub kind: SimilarityKind,
    pub n: usize,
    pub values: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directed: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Error)]
pub enum PrecomputedError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed JSON: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: declared n = {declared} but matrix has {actual} rows")]
    SizeMismatch { path: PathBuf, declared: usize, actual: usize },
    #[error("{path}: {source}")]
    Invalid { path: PathBuf, source: MatrixError },
    #[error("{path}: duplicate matrix for item `{item_id}` ({kind})")]
    Duplicate { path: PathBuf, item_id: String, kind: SimilarityKind },
}

impl PrecomputedFile {
    pub fn from_matrix(item_id: impl Into<String>, m: &SimilarityMatrix) -> Self {
        Self { item_id: item_id.into(), kind: m.kind(), n: m.n(), values: m.rows(), directed: m.directed_rows() }
    }

    fn into_matrix(self, path: &Path) -> Result<(String, SimilarityMatrix), PrecomputedError> {
        if self.values.len() != self.n {
            return Err(PrecomputedError::SizeMismatch {
                path: path.to_path_buf(),
                declared: self.n,
                actual: self.values.len(),
            });
        }
        let invalid = |source| PrecomputedError::Invalid { path: path.to_path_buf(), source };
        let matrix = match (self.kind, self.directed) {
            (SimilarityKind::Nli, Some(directed)) => SimilarityMatrix::from_nli_parts(self.values, directed),
            (SimilarityKind::Nli, None) => Err(MatrixError::MissingDirected),
            (kind, Some(_)) => Err(MatrixError::UnexpectedDirected(kind)),
            (kind, None) => SimilarityMatrix::from_rows(kind, self.values),
        }
        .map_err(invalid)?;
        Ok((self.item_id, matrix))
    }
}

/// Reads and validates one precomputed matrix file.
pub fn load_precomputed(path: &Path) -> Result<(String, SimilarityMatrix), PrecomputedError> {
    let bytes = fs::read(path).map_err(|source| PrecomputedError::Io { path: path.to_path_buf(), source })?;
    let file: PrecomputedFile =
        serde_json::from_slice(&bytes).map_err(|source| PrecomputedError::Json { path: path.to_path_buf(), source })?;
    file.into_matrix(path)
}

pub fn write_precomputed(path: &Path, item_id: &str, m: &SimilarityMatrix) -> std::io::Result<()> {
    let json = serde_json::to_vec_pretty(&PrecomputedFile::from_matrix(item_id, m))?;
    fs::write(path, json)
}

/// Qualified lookup key for a response set.
pub fn qualified_id(rs: &ResponseSet) -> String {
    let c = rs.config();
    format!("{}|{}|{}|{}", c.model, c.question, c.strategy, rs.item_id())
}

/// All `*.json` matrices in a directory, indexed by `(item_id, kind)`.
#[derive(Debug, Default)]
pub struct PrecomputedStore {
    matrices: HashMap<(String, SimilarityKind), SimilarityMatrix>,
}

impl PrecomputedStore {
    pub fn load_dir(dir: &Path) -> Result<Self, PrecomputedError> {
        let io_err = |source| PrecomputedError::Io { path: dir.to_path_buf(), source };
        let mut paths: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(io_err)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io_err)?;
        paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
        paths.sort();
        let mut matrices = HashMap::new();
        for path in paths {
            let (item_id, m) = load_precomputed(&path)?;
            let kind = m.kind();
            if matrices.insert((item_id.clone(), kind), m).is_some() {
                return Err(PrecomputedError::Duplicate { path, item_id, kind });
            }
        }
        Ok(Self { matrices })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn has_kind(&self, kind: SimilarityKind) -> bool {
        self.matrices.keys().any(|(_, k)| *k == kind)
    }

    /// Matrix for a response set, only if its size matches `N`.
    pub fn get(&self, rs: &ResponseSet, kind: SimilarityKind) -> Option<&SimilarityMatrix> {
        self.matrices
            .get(&(qualified_id(rs), kind))
            .or_else(|| self.matrices.get(&(rs.item_id().to_string(), kind)))
            .filter(|m| m.n() == rs.n())
    }
}
