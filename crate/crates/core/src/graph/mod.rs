//! Uncertainty from the relation graph over a response set: normalized
//! average degree (NAD), graph eccentricity (GE), inverse algebraic
//! connectivity (Eigen), and discrete semantic entropy (DSE).
//!
//! The graph is complete. Edge similarity `s` feeds the adjacency used by
//! the Laplacian; edge distance `1 - s` feeds shortest paths.

mod spectral;
mod union_find;

use thiserror::Error;

pub use spectral::{symmetric_eigenvalues, NonConvergence, MAX_SWEEPS};
pub use union_find::DisjointSet;

use crate::categorical::entropy_of_counts;
use crate::similarity::{SimilarityKind, SimilarityMatrix};

/// Below this, λ2 is treated as zero and the Eigen value is capped.
pub const LAMBDA2_EPSILON: f64 = 1e-9;
/// Eigen value reported for a (numerically) disconnected graph, `1/ε`.
pub const EIGEN_CAP: f64 = 1e9;
/// Default bidirectional entailment cutoff for semantic clustering.
pub const DEFAULT_DSE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error(transparent)]
    Eigen(#[from] NonConvergence),
    #[error("semantic clustering needs an nli matrix with directed scores, got {0}")]
    NotNli(SimilarityKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationGraph {
    matrix: SimilarityMatrix,
}

impl RelationGraph {
    pub fn new(matrix: SimilarityMatrix) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &SimilarityMatrix {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Edge distance `1 - s_ij`; zero on the diagonal.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            1.0 - self.matrix.get(i, j)
        }
    }

    /// `L = D - A` with `A_ij = s_ij` off the diagonal, row-major.
    pub fn laplacian(&self) -> Vec<f64> {
        let n = self.n();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            let mut degree = 0.0;
            for j in 0..n {
                if i != j {
                    let a = self.matrix.get(i, j);
                    l[i * n + j] = -a;
                    degree += a;
                }
            }
            l[i * n + i] = degree;
        }
        l
    }

    /// All-pairs shortest-path distances (Floyd–Warshall), row-major.
    pub fn shortest_paths(&self) -> Vec<f64> {
        let n = self.n();
        let mut d: Vec<f64> = (0..n * n).map(|idx| self.distance(idx / n, idx % n)).collect();
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                for j in 0..n {
                    let via = dik + d[k * n + j];
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        d
    }
}

/// `1 - mean off-diagonal similarity`.
pub fn nad(g: &RelationGraph) -> f64 {
    let n = g.n();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += g.matrix.get(i, j);
            }
        }
    }
    1.0 - sum / (n * (n - 1)) as f64
}

/// Mean over nodes of the largest shortest-path distance from that node.
pub fn eccentricity(g: &RelationGraph) -> f64 {
    let n = g.n();
    let d = g.shortest_paths();
    let total: f64 = d
        .chunks(n)
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .sum();
    total / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenUncertainty {
    /// `1/λ2`, or [`EIGEN_CAP`] when capped.
    pub value: f64,
    pub lambda2: f64,
    pub capped: bool,
}

/// `1/λ2(L)` for the weighted unnormalized Laplacian.
pub fn algebraic_connectivity_uncertainty(g: &RelationGraph) -> Result<EigenUncertainty, GraphError> {
    let eig = symmetric_eigenvalues(&g.laplacian(), g.n())?;
    let lambda2 = eig[1];
    if lambda2 < LAMBDA2_EPSILON {
        Ok(EigenUncertainty { value: EIGEN_CAP, lambda2, capped: true })
    } else {
        Ok(EigenUncertainty { value: 1.0 / lambda2, lambda2, capped: false })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticClustering {
    /// Ascending member lists, ordered by smallest member.
    pub clusters: Vec<Vec<usize>>,
    pub threshold: f64,
}

impl SemanticClustering {
    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }
}

/// Connected components of the bidirectional-entailment relation:
/// `i ~ j` iff both `s_{i→j}` and `s_{j→i}` exceed `threshold`.
pub fn semantic_clusters(g: &RelationGraph, threshold: f64) -> Result<SemanticClustering, GraphError> {
    let m = g.matrix();
    if !m.has_directed() {
        return Err(GraphError::NotNli(m.kind()));
    }
    let n = m.n();
    let mut ds = DisjointSet::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let fwd = m.directed(i, j).expect("directed present");
            let bwd = m.directed(j, i).expect("directed present");
            if fwd > threshold && bwd > threshold {
                ds.union(i, j);
            }
        }
    }
    Ok(SemanticClustering { clusters: ds.components(), threshold })
}

/// Entropy (natural log) of the cluster-size distribution over `n` nodes.
pub fn discrete_semantic_entropy(c: &SemanticClustering, n: usize) -> f64 {
    entropy_of_counts(c.sizes(), n)
}
