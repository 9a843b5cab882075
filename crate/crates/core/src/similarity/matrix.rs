use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for symmetry and unit-diagonal checks on externally supplied
/// matrices.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    Jaccard,
    Embed,
    Nli,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 3] = [SimilarityKind::Jaccard, SimilarityKind::Embed, SimilarityKind::Nli];

    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityKind::Jaccard => "jaccard",
            SimilarityKind::Embed => "embed",
            SimilarityKind::Nli => "nli",
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimilarityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jaccard" | "js" => Ok(Self::Jaccard),
            "embed" | "embedding" => Ok(Self::Embed),
            "nli" => Ok(Self::Nli),
            other => Err(format!("unknown similarity kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix must be at least 2×2, got n = {0}")]
    TooSmall(usize),
    #[error("row {row} has {len} entries, expected {n}")]
    Ragged { row: usize, len: usize, n: usize },
    #[error("entry ({i},{j}) = {value} outside [0, 1]")]
    OutOfRange { i: usize, j: usize, value: f64 },
    #[error("asymmetric entries ({i},{j}) = {a} vs ({j},{i}) = {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("diagonal entry ({i},{i}) = {value}, expected 1")]
    Diagonal { i: usize, value: f64 },
    #[error("nli entry ({i},{j}) = {value} is not the mean of its directed scores ({expected})")]
    DirectedMismatch { i: usize, j: usize, value: f64, expected: f64 },
    #[error("kind {0} does not carry directed scores")]
    UnexpectedDirected(SimilarityKind),
    #[error("nli matrix requires directed scores")]
    MissingDirected,
}

/// Symmetric pairwise similarities in [0, 1] with unit diagonal.
///
/// NLI matrices also keep the one-directional scores `s_{i→j}`; the
/// symmetric entry is always the mean of both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    kind: SimilarityKind,
    values: Vec<f64>,
    directed: Option<Vec<f64>>,
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize, MatrixError> {
    let n = rows.len();
    if n < 2 {
        return Err(MatrixError::TooSmall(n));
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(MatrixError::Ragged { row, len: r.len(), n });
        }
    }
    Ok(n)
}

fn check_range(rows: &[Vec<f64>]) -> Result<(), MatrixError> {
    for (i, r) in rows.iter().enumerate() {
        for (j, &value) in r.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(MatrixError::OutOfRange { i, j, value });
            }
        }
    }
    Ok(())
}

impl SimilarityMatrix {
    /// Validates an externally supplied symmetric matrix (Jaccard or
    /// embedding). Tiny asymmetries within [`SYMMETRY_TOLERANCE`] are
    /// averaged away.
    pub fn from_rows(kind: SimilarityKind, rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        if kind == SimilarityKind::Nli {
            return Err(MatrixError::MissingDirected);
        }
        let n = check_square(&rows)?;
        check_range(&rows)?;
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            let d = rows[i][i];
            if (d - 1.0).abs() > SYMMETRY_TOLERANCE {
                return Err(MatrixError::Diagonal { i, value: d });
            }
            values[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(MatrixError::Asymmetric { i, j, a, b });
                }
                let s = if a == b { a } else { 0.5 * (a + b) };
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
        Ok(Self { n, kind, values, directed: None })
    }

    /// Builds an NLI matrix from one-directional scores. The directed
    /// diagonal is ignored (self-pairs are never scored).
    pub fn from_directed(directed_rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = check_square(&directed_rows)?;
        for (i, r) in directed_rows.iter().enumerate() {
            for (j, &value) in r.iter().enumerate() {
                if i != j && !(0.0..=1.0).contains(&value) {
                    return Err(MatrixError::OutOfRange { i, j, value });
                }
            }
        }
        let mut directed = vec![1.0; n * n];
        let mut values = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    directed[i * n + j] = directed_rows[i][j];
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (directed[i * n + j] + directed[j * n + i]);
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
        Ok(Self { n, kind: SimilarityKind::Nli, values, directed: Some(directed) })
    }

    /// Validates a stored NLI matrix whose symmetric part was written
    /// alongside the directed scores.
    pub fn from_nli_parts(rows: Vec<Vec<f64>>, directed_rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = check_square(&rows)?;
        check_range(&rows)?;
        let m = Self::from_directed(directed_rows)?;
        if m.n != n {
            return Err(MatrixError::Ragged { row: 0, len: m.n, n });
        }
        for i in 0..n {
            if (rows[i][i] - 1.0).abs() > SYMMETRY_TOLERANCE {
                return Err(MatrixError::Diagonal { i, value: rows[i][i] });
            }
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                if (a - b).abs() > SYMMETRY_TOLERANCE {
                    return Err(MatrixError::Asymmetric { i, j, a, b });
                }
                let expected = m.get(i, j);
                if (a - expected).abs() > SYMMETRY_TOLERANCE {
                    return Err(MatrixError::DirectedMismatch { i, j, value: a, expected });
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// `s_{i→j}` for NLI matrices.
    pub fn directed(&self, i: usize, j: usize) -> Option<f64> {
        self.directed.as_ref().map(|d| d[i * self.n + j])
    }

    pub fn has_directed(&self) -> bool {
        self.directed.is_some()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn directed_rows(&self) -> Option<Vec<Vec<f64>>> {
        self.directed.as_ref().map(|d| d.chunks(self.n).map(<[f64]>::to_vec).collect())
    }

    /// Leading `k × k` principal submatrix (the first `k` samples).
    pub fn leading(&self, k: usize) -> SimilarityMatrix {
        assert!((2..=self.n).contains(&k), "prefix size {k} outside 2..={}", self.n);
        let take = |src: &[f64]| -> Vec<f64> {
            (0..k).flat_map(|i| src[i * self.n..i * self.n + k].iter().copied()).collect()
        };
        SimilarityMatrix {
            n: k,
            kind: self.kind,
            values: take(&self.values),
            directed: self.directed.as_deref().map(take),
        }
    }

    /// Same matrix with nodes relabeled: node `i` of the result is node
    /// `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> SimilarityMatrix {
        assert_eq!(perm.len(), self.n);
        let n = self.n;
        let apply = |src: &[f64]| -> Vec<f64> {
            (0..n).flat_map(|i| (0..n).map(move |j| src[perm[i] * n + perm[j]])).collect()
        };
        SimilarityMatrix {
            n,
            kind: self.kind,
            values: apply(&self.values),
            directed: self.directed.as_deref().map(apply),
        }
    }
}
