mod common;

use common::*;
use playnet_core::centrality::{betweenness_centrality, DEFAULT_CENTRAL_QUANTILE};
use playnet_core::ingest::active_week_counts;
use playnet_core::{
    build_snapshots, build_static_graph, compute_ledger, filter_short_lived_players,
    mann_whitney_u, node_influence, select_central_players, select_influential, Alternative,
    CentralityConfig, CentralityScores, Granularity, InfluenceConfig, Measure, PValueMethod,
    PlayerGraph, PlayerIdx,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn centrality_follows_relabeling(seed in 0u64..10_000) {
        let g = random_graph(seed, 12);
        let n = g.node_count();
        let mut perm: Vec<PlayerIdx> = (0..n as PlayerIdx).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let edges: Vec<(PlayerIdx, PlayerIdx)> =
            g.edges().keys().map(|&(a, b)| (perm[a as usize], perm[b as usize])).collect();
        let h = PlayerGraph::from_unweighted(n, &edges);
        let sg = CentralityScores::compute(&g, &CentralityConfig::default()).unwrap();
        let sh = CentralityScores::compute(&h, &CentralityConfig::default()).unwrap();
        for m in Measure::ALL {
            for (v, &pv) in perm.iter().enumerate() {
                let (a, b) = (sg.get(m)[v], sh.get(m)[pv as usize]);
                prop_assert!((a - b).abs() < 1e-7, "{m} node {v}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn betweenness_sums_to_interior_path_length(seed in 0u64..10_000) {
        let g = random_graph(seed, 12);
        let dist = floyd_warshall(&adjacency(&g));
        let n = g.node_count();
        let expected: u32 = (0..n)
            .flat_map(|s| (s + 1..n).map(move |t| (s, t)))
            .filter_map(|(s, t)| dist[s][t])
            .map(|d| d - 1)
            .sum();
        let total: f64 = betweenness_centrality(&g).iter().sum();
        prop_assert!((total - expected as f64).abs() < 1e-9);
    }

    #[test]
    fn pagerank_is_a_distribution(seed in 0u64..10_000) {
        let g = random_graph(seed, 12);
        let s = CentralityScores::compute(&g, &CentralityConfig::default()).unwrap();
        prop_assert!((s.pagerank.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(s.pagerank.iter().all(|&x| x > 0.0));
        prop_assert!(s.eigenvector.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
    }

    #[test]
    fn central_selection_shrinks_with_quantile(seed in 0u64..10_000, lo in 0.05f64..0.5, gap in 0.05f64..0.45) {
        let g = build_static_graph(&random_records(seed, 12, 6, 8));
        let s = CentralityScores::compute(&g, &CentralityConfig::default()).unwrap();
        let loose = select_central_players(&s, lo).unwrap();
        let strict = select_central_players(&s, lo + gap).unwrap();
        prop_assert!(strict.players.is_subset(&loose.players));
    }

    #[test]
    fn influential_selection_shrinks_with_quantile(seed in 0u64..10_000, lo in 0.05f64..0.5, gap in 0.05f64..0.45) {
        let series = build_snapshots(&random_records(seed, 10, 5, 6), Granularity::Week);
        let ledger = compute_ledger(&series, InfluenceConfig::default()).unwrap();
        let nodes = node_influence(&ledger, &series);
        let loose = select_influential(series.roster(), &nodes, lo).unwrap();
        let strict = select_influential(series.roster(), &nodes, lo + gap).unwrap();
        prop_assert!(strict.players.is_subset(&loose.players));
        prop_assert!(!strict.players.is_empty());
    }

    #[test]
    fn record_order_does_not_matter(seed in 0u64..10_000) {
        let records = random_records(seed, 9, 5, 6);
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0xabc));
        let run = |r: &[playnet_core::MatchRecord]| {
            let series = build_snapshots(r, Granularity::Week);
            let ledger = compute_ledger(&series, InfluenceConfig::default()).unwrap();
            (node_influence(&ledger, &series), ledger.entries, build_static_graph(r))
        };
        let (na, la, ga) = run(&records);
        let (nb, lb, gb) = run(&shuffled);
        prop_assert_eq!(na, nb);
        prop_assert_eq!(la, lb);
        prop_assert_eq!(ga.edges(), gb.edges());
    }

    #[test]
    fn filter_is_idempotent(seed in 0u64..10_000, weeks in 1usize..8, min_weeks in 1usize..6) {
        let records = random_records(seed, 14, weeks, 4);
        let once = filter_short_lived_players(&records, min_weeks).unwrap();
        let twice = filter_short_lived_players(&once.records, min_weeks).unwrap();
        prop_assert_eq!(&once.records, &twice.records);
        prop_assert_eq!(&once.retained, &twice.retained);
        prop_assert!(twice.excluded.is_empty());
        let counts = active_week_counts(&once.records);
        prop_assert!(counts.values().all(|&c| c >= min_weeks));
        prop_assert_eq!(counts.keys().cloned().collect::<BTreeSet<_>>(), once.retained.clone());
    }

    #[test]
    fn pair_counts_add_up(seed in 0u64..10_000) {
        let records = random_records(seed, 10, 4, 6);
        let teammate_pairs: u64 = records
            .iter()
            .flat_map(|r| r.teams())
            .map(|t| (t.len() * (t.len() - 1) / 2) as u64)
            .sum();
        let g = build_static_graph(&records);
        let static_total: u64 = g.edges().values().map(|&w| w as u64).sum();
        let series = build_snapshots(&records, Granularity::Day);
        let snapshot_total: u64 =
            series.snapshots().iter().flat_map(|s| s.edges.values()).map(|&w| w as u64).sum();
        prop_assert_eq!(static_total, teammate_pairs);
        prop_assert_eq!(snapshot_total, teammate_pairs);
    }

    #[test]
    fn ledger_is_antisymmetric_and_bounded(seed in 0u64..10_000) {
        let series = build_snapshots(&random_records(seed, 8, 5, 6), Granularity::Week);
        let ledger = compute_ledger(&series, InfluenceConfig::default()).unwrap();
        for e in &ledger.entries {
            prop_assert_eq!(e.value_for(e.a), -e.value_for(e.b));
            prop_assert!(e.value.abs() <= 1.0);
        }
        let nodes = node_influence(&ledger, &series);
        let net: f64 = nodes.iter().map(|n| n.influence * n.temporal_degree as f64).sum();
        prop_assert!(net.abs() < 1e-9);
        prop_assert!(nodes.iter().all(|n| n.influence.abs() <= 1.0));
    }

    #[test]
    fn mann_whitney_swaps_consistently(seed in 0u64..10_000, na in 1usize..30, nb in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = tie_free_pair(&mut rng, na, nb);
        for method in [PValueMethod::Auto, PValueMethod::Normal] {
            let (u_ab, p_ab, _) = mann_whitney_u(&a, &b, Alternative::AGreater, method).unwrap();
            let (u_ba, p_ba, _) = mann_whitney_u(&b, &a, Alternative::ALess, method).unwrap();
            prop_assert_eq!(u_ab + u_ba, (na * nb) as f64);
            prop_assert!((p_ab - p_ba).abs() < 1e-12);
        }
    }
}

#[test]
fn star_selection_respects_ties() {
    let g = PlayerGraph::from_unweighted(20, &(1..20).map(|i| (0, i)).collect::<Vec<_>>());
    let s = CentralityScores::compute(&g, &CentralityConfig::default()).unwrap();
    // The 0.9 threshold falls between two tied leaves, so every node qualifies.
    let tied = select_central_players(&s, DEFAULT_CENTRAL_QUANTILE).unwrap();
    assert_eq!(tied.players.len(), 20);
    let strict = select_central_players(&s, 0.99).unwrap();
    assert_eq!(strict.players.len(), 1);
    assert!(strict.players.contains(g.roster().id(0)));
}
