//! Static co-play network: players are connected when they were teammates in
//! at least one match, weighted by the number of shared matches.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ingest::MatchRecord;

/// Dense player index into a [`Roster`].
pub type PlayerIdx = u32;

/// Sorted, de-duplicated player ids with a reverse lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Roster {
    ids: Vec<String>,
    lookup: HashMap<String, PlayerIdx>,
}

impl Roster {
    pub fn from_records(records: &[MatchRecord]) -> Self {
        let ids: BTreeSet<&str> = records
            .iter()
            .flat_map(|r| r.participants().map(|p| p.player_id.as_str()))
            .collect();
        Self::from_ids(ids.into_iter().map(String::from))
    }

    pub fn from_ids<I: IntoIterator<Item = String>>(ids: I) -> Self {
        let ids: BTreeSet<String> = ids.into_iter().collect();
        let ids: Vec<String> = ids.into_iter().collect();
        let lookup = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i as PlayerIdx))
            .collect();
        Roster { ids, lookup }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn index_of(&self, id: &str) -> Option<PlayerIdx> {
        self.lookup.get(id).copied()
    }

    pub fn id(&self, idx: PlayerIdx) -> &str {
        &self.ids[idx as usize]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

/// Orders a pair so the smaller index comes first.
pub fn edge_key(a: PlayerIdx, b: PlayerIdx) -> (PlayerIdx, PlayerIdx) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Calls `f` once for every unordered teammate pair in a match.
pub(crate) fn for_each_teammate_pair<F: FnMut(PlayerIdx, PlayerIdx)>(
    record: &MatchRecord,
    roster: &Roster,
    mut f: F,
) {
    for team in record.teams() {
        let members: Vec<PlayerIdx> = team
            .iter()
            .map(|p| {
                roster
                    .index_of(&p.player_id)
                    .expect("roster covers every participant")
            })
            .collect();
        for (k, &a) in members.iter().enumerate() {
            for &b in &members[k + 1..] {
                f(a, b);
            }
        }
    }
}

/// Undirected weighted graph with a sorted adjacency list per node.
#[derive(Debug, Clone, Default)]
pub struct PlayerGraph {
    roster: Roster,
    edges: BTreeMap<(PlayerIdx, PlayerIdx), u32>,
    adjacency: Vec<Vec<(PlayerIdx, u32)>>,
}

impl PlayerGraph {
    /// Builds a graph from explicit weighted edges. Self-loops and zero
    /// weights are ignored; repeated pairs accumulate.
    pub fn from_edges<I>(roster: Roster, edges: I) -> Self
    where
        I: IntoIterator<Item = (PlayerIdx, PlayerIdx, u32)>,
    {
        let mut map = BTreeMap::new();
        for (a, b, w) in edges {
            if a == b || w == 0 {
                continue;
            }
            assert!(
                (a as usize) < roster.len() && (b as usize) < roster.len(),
                "edge endpoint outside roster"
            );
            *map.entry(edge_key(a, b)).or_insert(0) += w;
        }
        let mut adjacency = vec![Vec::new(); roster.len()];
        for (&(a, b), &w) in &map {
            adjacency[a as usize].push((b, w));
            adjacency[b as usize].push((a, w));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        PlayerGraph {
            roster,
            edges: map,
            adjacency,
        }
    }

    /// Convenience constructor for fixtures: unit-weight edges over ids `0..n`.
    pub fn from_unweighted(n: usize, edges: &[(PlayerIdx, PlayerIdx)]) -> Self {
        let roster = Roster::from_ids((0..n).map(|i| format!("{i:06}")));
        Self::from_edges(roster, edges.iter().map(|&(a, b)| (a, b, 1)))
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn node_count(&self) -> usize {
        self.roster.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &BTreeMap<(PlayerIdx, PlayerIdx), u32> {
        &self.edges
    }

    pub fn weight(&self, a: PlayerIdx, b: PlayerIdx) -> Option<u32> {
        self.edges.get(&edge_key(a, b)).copied()
    }

    pub fn neighbors(&self, v: PlayerIdx) -> &[(PlayerIdx, u32)] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: PlayerIdx) -> usize {
        self.adjacency[v as usize].len()
    }

    /// Sum of incident edge weights.
    pub fn strength(&self, v: PlayerIdx) -> u64 {
        self.adjacency[v as usize]
            .iter()
            .map(|&(_, w)| w as u64)
            .sum()
    }

    /// Mean incident edge weight (0 for isolated nodes).
    pub fn mean_edge_weight(&self, v: PlayerIdx) -> f64 {
        let d = self.degree(v);
        if d == 0 {
            0.0
        } else {
            self.strength(v) as f64 / d as f64
        }
    }

    /// Connected components, each sorted, ordered by descending size then by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<PlayerIdx>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start as PlayerIdx];
            let mut queue = VecDeque::from([start as PlayerIdx]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in self.neighbors(v) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        out
    }

    /// Unweighted hop distances from `source`; `u32::MAX` marks unreachable.
    pub fn bfs_distances(&self, source: PlayerIdx) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.node_count()];
        dist[source as usize] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let next = dist[v as usize] + 1;
            for &(w, _) in self.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = next;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Local clustering coefficient; nodes of degree below 2 score 0.
    pub fn local_clustering(&self, v: PlayerIdx) -> f64 {
        let nbrs = self.neighbors(v);
        let k = nbrs.len();
        if k < 2 {
            return 0.0;
        }
        let mut links = 0usize;
        for (i, &(a, _)) in nbrs.iter().enumerate() {
            for &(b, _) in &nbrs[i + 1..] {
                if self.weight(a, b).is_some() {
                    links += 1;
                }
            }
        }
        2.0 * links as f64 / (k * (k - 1)) as f64
    }
}

/// Builds the co-play graph: each teammate pair in a match adds one to that
/// pair's weight. Opponents are not linked. Every participant becomes a node.
pub fn build_static_graph(records: &[MatchRecord]) -> PlayerGraph {
    let roster = Roster::from_records(records);
    let mut pairs = Vec::new();
    for r in records {
        for_each_teammate_pair(r, &roster, |a, b| pairs.push((a, b, 1)));
    }
    PlayerGraph::from_edges(roster, pairs)
}

pub const DEFAULT_EXACT_PATHS_LIMIT: usize = 20_000;
pub const SAMPLED_PATH_SOURCES: usize = 1_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub average_degree: f64,
    pub average_weighted_degree: f64,
    pub components: usize,
    pub lcc_fraction: f64,
    pub second_lcc_fraction: f64,
    pub average_clustering: f64,
    pub average_path_length: f64,
    pub diameter: u32,
    /// True when path statistics come from sampled BFS sources; the diameter
    /// is then a lower bound.
    pub paths_estimated: bool,
}

impl GraphSummary {
    /// Flat `key=value` text report.
    pub fn to_key_values(&self) -> String {
        format!(
            "nodes={}\nedges={}\naverage_degree={}\naverage_weighted_degree={}\n\
             components={}\nlcc_fraction={}\nsecond_lcc_fraction={}\n\
             average_clustering={}\naverage_path_length={}\ndiameter={}\npaths_estimated={}\n",
            self.nodes,
            self.edges,
            self.average_degree,
            self.average_weighted_degree,
            self.components,
            self.lcc_fraction,
            self.second_lcc_fraction,
            self.average_clustering,
            self.average_path_length,
            self.diameter,
            self.paths_estimated,
        )
    }
}

/// Descriptive statistics of the static graph. Path length and diameter are
/// measured inside the largest component: exactly when it has at most
/// `exact_paths_limit` nodes, otherwise from [`SAMPLED_PATH_SOURCES`] BFS
/// sources drawn with `seed`.
pub fn graph_summary(g: &PlayerGraph, exact_paths_limit: usize, seed: u64) -> GraphSummary {
    let n = g.node_count();
    let e = g.edge_count();
    let comps = g.components();
    let frac = |k: usize| {
        comps
            .get(k)
            .map_or(0.0, |c| c.len() as f64 / n.max(1) as f64)
    };
    let total_weight: u64 = g.edges().values().map(|&w| w as u64).sum();
    let (average_degree, average_weighted_degree, average_clustering) = if n == 0 {
        (0.0, 0.0, 0.0)
    } else {
        let clustering: f64 = (0..n as PlayerIdx)
            .into_par_iter()
            .map(|v| g.local_clustering(v))
            .collect::<Vec<_>>()
            .iter()
            .sum();
        (
            2.0 * e as f64 / n as f64,
            2.0 * total_weight as f64 / n as f64,
            clustering / n as f64,
        )
    };

    let lcc: &[PlayerIdx] = comps.first().map_or(&[], |c| c.as_slice());
    let estimated = lcc.len() > exact_paths_limit;
    let sources: Vec<PlayerIdx> = if estimated {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<PlayerIdx> =
            sample(&mut rng, lcc.len(), SAMPLED_PATH_SOURCES.min(lcc.len()))
                .into_iter()
                .map(|i| lcc[i])
                .collect();
        picked.sort_unstable();
        picked
    } else {
        lcc.to_vec()
    };
    // (sum of distances, number of pairs, eccentricity) per source
    let per_source: Vec<(u64, u64, u32)> = sources
        .par_iter()
        .map(|&s| {
            let dist = g.bfs_distances(s);
            let mut sum = 0u64;
            let mut pairs = 0u64;
            let mut ecc = 0u32;
            for &d in &dist {
                if d != u32::MAX && d > 0 {
                    sum += d as u64;
                    pairs += 1;
                    ecc = ecc.max(d);
                }
            }
            (sum, pairs, ecc)
        })
        .collect();
    let (dist_sum, pair_count, diameter) = per_source
        .iter()
        .fold((0u64, 0u64, 0u32), |(s, p, m), &(ds, dp, de)| {
            (s + ds, p + dp, m.max(de))
        });
    GraphSummary {
        nodes: n,
        edges: e,
        average_degree,
        average_weighted_degree,
        components: comps.len(),
        lcc_fraction: frac(0),
        second_lcc_fraction: frac(1),
        average_clustering,
        average_path_length: if pair_count == 0 {
            0.0
        } else {
            dist_sum as f64 / pair_count as f64
        },
        diameter,
        paths_estimated: estimated,
    }
}
