mod common;

use grade_uq::categorical::{categorical_entropy, LabelHistogram};
use grade_uq::graph::{
    algebraic_connectivity_uncertainty, discrete_semantic_entropy, eccentricity, nad, semantic_clusters,
    RelationGraph, EIGEN_CAP, LAMBDA2_EPSILON,
};
use grade_uq::similarity::{SimilarityKind, SimilarityMatrix};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn graph(rows: Vec<Vec<f64>>) -> RelationGraph {
    RelationGraph::new(SimilarityMatrix::from_rows(SimilarityKind::Embed, rows).unwrap())
}

#[test]
fn metrics_match_reference_implementations() {
    let mut rng = common::rng(11);
    for _ in 0..120 {
        let n = rng.gen_range(2..=8);
        let s = common::random_similarity(&mut rng, n);
        let g = graph(s.clone());
        assert!((nad(&g) - common::nad(&s)).abs() < 1e-12);
        assert!((eccentricity(&g) - common::eccentricity(&s)).abs() < 1e-9);

        let lambda2 = common::laplacian_spectrum(&s)[1];
        let e = algebraic_connectivity_uncertainty(&g).unwrap();
        assert!((e.lambda2 - lambda2).abs() < 1e-9, "λ2 {} vs {}", e.lambda2, lambda2);
        if lambda2 > 1e-6 {
            assert!(!e.capped);
            assert!((e.value - 1.0 / lambda2).abs() < 1e-6 * (1.0 / lambda2).max(1.0));
        }
        if e.capped {
            assert_eq!(e.value, EIGEN_CAP);
            assert!(e.lambda2 < LAMBDA2_EPSILON);
        }
    }
}

#[test]
fn semantic_entropy_is_entropy_of_cluster_sizes() {
    let mut rng = common::rng(12);
    for _ in 0..150 {
        let n = rng.gen_range(2..=8);
        let d = common::random_directed(&mut rng, n);
        let g = RelationGraph::new(SimilarityMatrix::from_directed(d.clone()).unwrap());
        let c = semantic_clusters(&g, 0.5).unwrap();
        let labels = common::clusters(&d, 0.5);
        let mut expected_sizes: Vec<usize> = common::tally(&labels).into_values().collect();
        let mut sizes = c.sizes();
        expected_sizes.sort_unstable();
        sizes.sort_unstable();
        assert_eq!(sizes, expected_sizes);
        let h = LabelHistogram::from_labels(common::cluster_labels(&labels));
        assert!((discrete_semantic_entropy(&c, n) - categorical_entropy(&h)).abs() < 1e-12);
    }
}

#[test]
fn disconnected_graph_is_capped() {
    let s = vec![
        vec![1.0, 0.9, 0.0, 0.0],
        vec![0.9, 1.0, 0.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.8],
        vec![0.0, 0.0, 0.8, 1.0],
    ];
    let e = algebraic_connectivity_uncertainty(&graph(s)).unwrap();
    assert!(e.capped);
    assert_eq!(e.value, 1e9);
}

proptest! {
    #[test]
    fn relabeling_nodes_changes_nothing(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = common::rng(seed);
        let s = common::random_similarity(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let g = graph(s);
        let p = RelationGraph::new(g.matrix().permuted(&perm));
        prop_assert!((nad(&g) - nad(&p)).abs() < 1e-12);
        prop_assert!((eccentricity(&g) - eccentricity(&p)).abs() < 1e-9);
        let (a, b) = (algebraic_connectivity_uncertainty(&g).unwrap(), algebraic_connectivity_uncertainty(&p).unwrap());
        prop_assert!((a.lambda2 - b.lambda2).abs() < 1e-9);

        let d = common::random_directed(&mut rng, n);
        let g = RelationGraph::new(SimilarityMatrix::from_directed(d).unwrap());
        let p = RelationGraph::new(g.matrix().permuted(&perm));
        let (ca, cb) = (semantic_clusters(&g, 0.5).unwrap(), semantic_clusters(&p, 0.5).unwrap());
        prop_assert!((discrete_semantic_entropy(&ca, n) - discrete_semantic_entropy(&cb, n)).abs() < 1e-12);
    }

    #[test]
    fn bounds_hold(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = common::rng(seed);
        let g = graph(common::random_similarity(&mut rng, n));
        let v = nad(&g);
        prop_assert!((0.0..=1.0).contains(&v));
        let ecc = eccentricity(&g);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ecc));
        let e = algebraic_connectivity_uncertainty(&g).unwrap();
        // λ2 of a complete graph with weights ≤ 1 is at most n.
        prop_assert!(e.value >= 1.0 / n as f64 - 1e-12);
    }
}
