//! Brute-force oracles and random fixtures shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use playnet_core::time::{DAY_SECONDS, GRID_ORIGIN, WEEK_SECONDS};
use playnet_core::{MatchRecord, PlayerGraph, PlayerIdx, PlayerParticipation, SnapshotSeries};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A Monday on the bin grid, far from the epoch.
pub const FIXTURE_T0: i64 = GRID_ORIGIN + 2000 * WEEK_SECONDS;

// ---------------------------------------------------------------- graphs

/// Random simple graph with at most `max_nodes` nodes and a random density.
pub fn random_graph(seed: u64, max_nodes: usize) -> PlayerGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_nodes);
    let p: f64 = rng.random_range(0.1..0.7);
    let mut edges = Vec::new();
    for a in 0..n as PlayerIdx {
        for b in a + 1..n as PlayerIdx {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    PlayerGraph::from_unweighted(n, &edges)
}

pub fn adjacency(g: &PlayerGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in g.edges().keys() {
        adj[a as usize][b as usize] = true;
        adj[b as usize][a as usize] = true;
    }
    adj
}

/// All-pairs hop distances by Floyd-Warshall; `None` when unreachable.
pub fn floyd_warshall(adj: &[Vec<bool>]) -> Vec<Vec<Option<u32>>> {
    let n = adj.len();
    let mut d: Vec<Vec<Option<u32>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Some(0)
                    } else {
                        adj[i][j].then_some(1)
                    }
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

pub fn degree_oracle(adj: &[Vec<bool>]) -> Vec<f64> {
    adj.iter()
        .map(|row| row.iter().filter(|&&x| x).count() as f64)
        .collect()
}

pub fn closeness_oracle(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let d = floyd_warshall(adj);
    (0..n)
        .map(|v| {
            let reach: Vec<u32> = (0..n).filter(|&u| u != v).filter_map(|u| d[v][u]).collect();
            let total: u32 = reach.iter().sum();
            if total == 0 {
                0.0
            } else {
                let r = reach.len() as f64;
                (r / (n - 1) as f64) * (r / total as f64)
            }
        })
        .collect()
}

/// Every shortest path from `s` to `t`, listed explicitly.
fn shortest_paths(
    adj: &[Vec<bool>],
    dist: &[Vec<Option<u32>>],
    s: usize,
    t: usize,
) -> Vec<Vec<usize>> {
    fn walk(
        adj: &[Vec<bool>],
        dist: &[Vec<Option<u32>>],
        t: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let here = *path.last().unwrap();
        if here == t {
            out.push(path.clone());
            return;
        }
        let left = dist[here][t].unwrap();
        for next in 0..adj.len() {
            if adj[here][next] && dist[next][t] == Some(left - 1) {
                path.push(next);
                walk(adj, dist, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if dist[s][t].is_some() {
        walk(adj, dist, t, &mut vec![s], &mut out);
    }
    out
}

/// Unnormalized betweenness over unordered pairs by path enumeration.
pub fn betweenness_oracle(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let dist = floyd_warshall(adj);
    let mut bc = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = shortest_paths(adj, &dist, s, t);
            if paths.is_empty() {
                continue;
            }
            for (v, score) in bc.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                let through = paths.iter().filter(|p| p.contains(&v)).count();
                *score += through as f64 / paths.len() as f64;
            }
        }
    }
    bc
}

fn components(adj: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let d = floyd_warshall(adj);
    let mut seen = vec![false; adj.len()];
    let mut out = Vec::new();
    for v in 0..adj.len() {
        if !seen[v] {
            let comp: Vec<usize> = (0..adj.len()).filter(|&u| d[v][u].is_some()).collect();
            for &u in &comp {
                seen[u] = true;
            }
            out.push(comp);
        }
    }
    out
}

/// Dense eigensolve per component: the leading unit eigenvector scaled by its
/// eigenvalue, then divided by the global maximum.
pub fn eigenvector_oracle(adj: &[Vec<bool>]) -> Vec<f64> {
    let n = adj.len();
    let mut x = vec![0.0; n];
    for comp in components(adj) {
        if comp.len() < 2 {
            continue;
        }
        let m = DMatrix::<f64>::from_fn(comp.len(), comp.len(), |i, j| {
            if adj[comp[i]][comp[j]] {
                1.0
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(m);
        let (top, &lambda) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a: &(usize, &f64), b| a.1.total_cmp(b.1))
            .unwrap();
        let vec = eig.eigenvectors.column(top);
        for (i, &v) in comp.iter().enumerate() {
            x[v] = vec[i].abs() * lambda;
        }
    }
    let max = x.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        for xi in &mut x {
            *xi /= max;
        }
    }
    x
}

/// PageRank as the solution of the dense linear system, isolated nodes
/// teleporting uniformly.
pub fn pagerank_oracle(adj: &[Vec<bool>], damping: f64) -> Vec<f64> {
    let n = adj.len();
    let nf = n as f64;
    let deg = degree_oracle(adj);
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            let walk = if deg[j] == 0.0 {
                1.0 / nf
            } else if adj[j][i] {
                1.0 / deg[j]
            } else {
                0.0
            };
            m[(i, j)] -= damping * walk;
        }
    }
    let rhs = DVector::from_element(n, (1.0 - damping) / nf);
    let x = m.lu().solve(&rhs).expect("pagerank system is nonsingular");
    let total: f64 = x.iter().sum();
    x.iter().map(|v| v / total).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

// -------------------------------------------------------------- match logs

fn participation(rng: &mut ChaCha8Rng, id: &str, duration: u64) -> PlayerParticipation {
    PlayerParticipation {
        player_id: id.to_string(),
        seconds_played: rng.random_range(duration / 4..=duration),
        completed: rng.random_bool(0.7),
    }
}

/// Random valid match log over `weeks` weeks among `players` players with
/// teams of one to three.
pub fn random_records(
    seed: u64,
    players: usize,
    weeks: usize,
    max_per_week: usize,
) -> Vec<MatchRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..players).map(|i| format!("p{i:03}")).collect();
    let mut out = Vec::new();
    for w in 0..weeks {
        let count = rng.random_range(1..=max_per_week);
        for _ in 0..count {
            let mut pool = ids.clone();
            pool.shuffle(&mut rng);
            let size_a = rng.random_range(1..=3.min(players - 1));
            let size_b = rng.random_range(1..=3.min(players - size_a));
            let duration = rng.random_range(300..=2400);
            let team_a = pool[..size_a]
                .iter()
                .map(|id| participation(&mut rng, id, duration))
                .collect();
            let team_b = pool[size_a..size_a + size_b]
                .iter()
                .map(|id| participation(&mut rng, id, duration))
                .collect();
            out.push(MatchRecord {
                match_id: format!("m{:06}", out.len()),
                start_time: FIXTURE_T0
                    + w as i64 * WEEK_SECONDS
                    + rng.random_range(0..WEEK_SECONDS - DAY_SECONDS),
                duration,
                team_a,
                team_b,
            });
        }
    }
    out
}

/// One random week repeated verbatim, so every player's weekly behavior is
/// identical across weeks.
pub fn constant_records(
    seed: u64,
    players: usize,
    weeks: usize,
    per_week: usize,
) -> Vec<MatchRecord> {
    let template = random_records(seed, players, 1, per_week);
    (0..weeks)
        .flat_map(|w| {
            template.iter().map(move |r| MatchRecord {
                match_id: format!("{}w{w}", r.match_id),
                start_time: r.start_time + w as i64 * WEEK_SECONDS,
                ..r.clone()
            })
        })
        .collect()
}

// ------------------------------------------------------------- influence

fn quantile_linear(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    let pos = q * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

fn cos_clamped(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let dot: f64 = (0..4).map(|f| a[f] * b[f]).sum();
    let na = (0..4).map(|f| a[f] * a[f]).sum::<f64>().sqrt();
    let nb = (0..4).map(|f| b[f] * b[f]).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

fn dist(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|f| (a[f] - b[f]).powi(2)).sum::<f64>().sqrt()
}

/// Node influence by explicit loops over players, snapshots and partners.
pub fn node_influence_oracle(series: &SnapshotSeries, epsilon: f64, w0: f64) -> Vec<f64> {
    let snaps = series.snapshots();
    let n = series.roster().len();
    let active: Vec<[f64; 4]> = snaps
        .iter()
        .flat_map(|s| s.players.values().map(|v| v.to_array()))
        .collect();
    let mut caps = [0.0; 4];
    for (f, cap) in caps.iter_mut().enumerate() {
        *cap = quantile_linear(active.iter().map(|v| v[f]).collect(), 0.95);
    }
    let scaled = |t: usize, p: usize| -> [f64; 4] {
        let raw = snaps[t].vector(p as PlayerIdx).to_array();
        let mut out = [0.0; 4];
        for f in 0..4 {
            out[f] = if caps[f] > 0.0 {
                (raw[f] / caps[f]).min(1.0)
            } else {
                0.0
            };
        }
        out
    };
    let mut scores = vec![0.0; n];
    for (i, score) in scores.iter_mut().enumerate() {
        let (mut sum, mut degree) = (0.0, 0u64);
        for t in 1..snaps.len() {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let w = snaps[t].weight(i as PlayerIdx, j as PlayerIdx);
                if w == 0 {
                    continue;
                }
                degree += 1;
                let (xi0, xi1, xj0, xj1) = (
                    scaled(t - 1, i),
                    scaled(t, i),
                    scaled(t - 1, j),
                    scaled(t, j),
                );
                let i_changed = dist(&xi0, &xi1) > epsilon;
                let j_changed = dist(&xj0, &xj1) > epsilon;
                if i_changed == j_changed {
                    continue;
                }
                let factor = ((1.0 + w as f64).ln() / (1.0 + w0).ln()).min(1.0);
                let delta = (cos_clamped(&xi1, &xj1) - cos_clamped(&xi0, &xj0)) * factor;
                sum += if i_changed { -delta } else { delta };
            }
        }
        *score = if degree == 0 {
            0.0
        } else {
            sum / degree as f64
        };
    }
    scores
}

// ----------------------------------------------------------- mann-whitney

/// Tail probability of U by enumerating every assignment of the pooled ranks
/// to the first sample. Samples must be tie-free.
pub fn mann_whitney_enumerated(a: &[f64], b: &[f64], a_greater: bool) -> (f64, f64) {
    let (na, nb) = (a.len(), b.len());
    let u_of = |mask: u32| -> u64 {
        // U counts (a, b) pairs with a above b, in pooled-rank order.
        let mut u = 0;
        for i in 0..na + nb {
            if mask & (1 << i) == 0 {
                continue;
            }
            u += (0..i).filter(|&j| mask & (1 << j) == 0).count() as u64;
        }
        u
    };
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&x| (x, true))
        .chain(b.iter().map(|&x| (x, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.total_cmp(&y.0));
    let observed_mask = pooled
        .iter()
        .enumerate()
        .filter(|(_, p)| p.1)
        .fold(0u32, |m, (i, _)| m | (1 << i));
    let observed = u_of(observed_mask);
    let (mut hits, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << (na + nb)) {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        let u = u_of(mask);
        if (a_greater && u >= observed) || (!a_greater && u <= observed) {
            hits += 1;
        }
    }
    (observed as f64, hits as f64 / total as f64)
}

/// Tie-free sample pair drawn from a shuffled grid of distinct values.
pub fn tie_free_pair(rng: &mut ChaCha8Rng, na: usize, nb: usize) -> (Vec<f64>, Vec<f64>) {
    let mut values: Vec<f64> = (0..na + nb)
        .map(|i| i as f64 * 0.5 + rng.random_range(0.0..0.25))
        .collect();
    values.shuffle(rng);
    let b = values.split_off(na);
    (values, b)
}
