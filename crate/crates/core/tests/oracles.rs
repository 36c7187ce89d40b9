mod common;

use common::*;
use playnet_core::centrality::{
    betweenness_centrality, closeness_centrality, degree_centrality, eigenvector_centrality,
    pagerank, EIGENVECTOR_MAX_ITER, EIGENVECTOR_TOL, PAGERANK_DAMPING, PAGERANK_MAX_ITER,
    PAGERANK_TOL,
};
use playnet_core::stats::exact_u_counts;
use playnet_core::{
    build_snapshots, compute_ledger, mann_whitney_u, node_influence, Alternative, Granularity,
    InfluenceConfig, PValueMethod, PlayerGraph, TestMethod,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-6;

fn assert_all_measures(g: &PlayerGraph, label: &str) {
    let adj = adjacency(g);
    let checks = [
        ("degree", degree_centrality(g), degree_oracle(&adj)),
        ("closeness", closeness_centrality(g), closeness_oracle(&adj)),
        (
            "betweenness",
            betweenness_centrality(g),
            betweenness_oracle(&adj),
        ),
        (
            "eigenvector",
            eigenvector_centrality(g, EIGENVECTOR_TOL, EIGENVECTOR_MAX_ITER).unwrap(),
            eigenvector_oracle(&adj),
        ),
        (
            "pagerank",
            pagerank(g, PAGERANK_DAMPING, PAGERANK_TOL, PAGERANK_MAX_ITER).unwrap(),
            pagerank_oracle(&adj, PAGERANK_DAMPING),
        ),
    ];
    for (name, got, want) in checks {
        let diff = max_abs_diff(&got, &want);
        assert!(
            diff < TOL,
            "{label}: {name} off by {diff}\n got {got:?}\nwant {want:?}"
        );
    }
}

#[test]
fn named_shapes_match_oracles() {
    type Shape = (&'static str, usize, Vec<(u32, u32)>);
    let shapes: Vec<Shape> = vec![
        ("path", 6, (0..5).map(|i| (i, i + 1)).collect()),
        ("star", 7, (1..7).map(|i| (0, i)).collect()),
        ("cycle", 8, (0..8).map(|i| (i, (i + 1) % 8)).collect()),
        (
            "k33",
            6,
            (0..3).flat_map(|a| (3..6).map(move |b| (a, b))).collect(),
        ),
        (
            "two components",
            7,
            vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5)],
        ),
        ("with isolate", 5, vec![(0, 1), (1, 2), (2, 3)]),
        ("single edge", 2, vec![(0, 1)]),
        ("single node", 1, vec![]),
    ];
    for (label, n, edges) in shapes {
        assert_all_measures(&PlayerGraph::from_unweighted(n, &edges), label);
    }
}

#[test]
fn star_values_by_hand() {
    let g = PlayerGraph::from_unweighted(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
    let bc = betweenness_centrality(&g);
    assert_eq!(bc, vec![6.0, 0.0, 0.0, 0.0, 0.0]);
    let cl = closeness_centrality(&g);
    assert!((cl[0] - 1.0).abs() < 1e-12);
    assert!((cl[1] - 4.0 / 7.0).abs() < 1e-12);
}

#[test]
fn random_graphs_match_oracles() {
    for seed in 1000..1060 {
        assert_all_measures(&random_graph(seed, 12), &format!("seed {seed}"));
    }
}

#[test]
fn node_influence_matches_nested_loops() {
    for seed in 0..60 {
        let records = random_records(seed, 4 + (seed as usize % 7), 2 + (seed as usize % 5), 6);
        let series = build_snapshots(&records, Granularity::Week);
        let config = InfluenceConfig::default();
        let ledger = compute_ledger(&series, config).unwrap();
        let got = node_influence(&ledger, &series);
        let want = node_influence_oracle(&series, config.epsilon, config.w0);
        for (g, w) in got.iter().zip(&want) {
            assert!(
                (g.influence - w).abs() < 1e-12,
                "seed {seed}: {} vs {w}",
                g.influence
            );
        }
    }
}

#[test]
fn exact_null_counts_are_binomial() {
    for m in 0..7usize {
        for n in 0..7usize {
            let counts = exact_u_counts(m, n);
            assert_eq!(counts.len(), m * n + 1);
            let total: u128 = counts.iter().sum();
            let binom = (1..=m as u128).fold(1u128, |acc, k| acc * (n as u128 + k) / k);
            assert_eq!(total, binom, "m={m} n={n}");
            assert!(counts.iter().eq(counts.iter().rev()), "null is symmetric");
        }
    }
}

#[test]
fn exact_p_values_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for na in 1..=5 {
        for nb in 1..=5 {
            for _ in 0..5 {
                let (a, b) = tie_free_pair(&mut rng, na, nb);
                for (alt, greater) in [(Alternative::AGreater, true), (Alternative::ALess, false)] {
                    let (u, p, method) = mann_whitney_u(&a, &b, alt, PValueMethod::Auto).unwrap();
                    let (u_ref, p_ref) = mann_whitney_enumerated(&a, &b, greater);
                    assert_eq!(method, TestMethod::Exact);
                    assert_eq!(u, u_ref);
                    assert_eq!(p, p_ref, "{a:?} vs {b:?} {alt}");
                }
            }
        }
    }
}

#[test]
fn ties_fall_back_to_normal_approximation() {
    let a = [1.0, 2.0, 2.0, 3.0];
    let b = [2.0, 4.0, 5.0];
    let (u, p, method) = mann_whitney_u(&a, &b, Alternative::ALess, PValueMethod::Auto).unwrap();
    assert_eq!(method, TestMethod::NormalApproximation);
    assert_eq!(u, 2.0);
    assert!(p > 0.0 && p < 1.0);
}
