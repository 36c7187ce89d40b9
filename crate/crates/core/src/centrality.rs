//! The five structural centralities, computed on the unweighted topology of
//! the co-play graph, and the top-quantile intersection that defines central
//! players.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{PlayerGraph, PlayerIdx, Roster};
use crate::stats::quantile_sorted;

#[derive(Debug, Error, PartialEq)]
pub enum CentralityError {
    #[error("{measure} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        measure: Measure,
        iterations: usize,
        residual: f64,
    },
    #[error("quantile must lie strictly between 0 and 1, got {0}")]
    InvalidQuantile(f64),
    #[error("eigenvector centrality needs a nonempty graph")]
    EmptyGraph,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Degree,
    Closeness,
    Betweenness,
    Eigenvector,
    PageRank,
}

impl Measure {
    pub const ALL: [Measure; 5] = [
        Measure::Degree,
        Measure::Closeness,
        Measure::Betweenness,
        Measure::Eigenvector,
        Measure::PageRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::Closeness => "closeness",
            Measure::Betweenness => "betweenness",
            Measure::Eigenvector => "eigenvector",
            Measure::PageRank => "pagerank",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Unweighted neighbor count.
pub fn degree_centrality(g: &PlayerGraph) -> Vec<f64> {
    (0..g.node_count() as PlayerIdx)
        .map(|v| g.degree(v) as f64)
        .collect()
}

/// Closeness with Wasserman-Faust scaling: a node reaching `r` others at
/// total hop distance `d` scores `(r / (n - 1)) * (r / d)`; isolated nodes
/// score 0.
pub fn closeness_centrality(g: &PlayerGraph) -> Vec<f64> {
    let n = g.node_count();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n as PlayerIdx)
        .into_par_iter()
        .map(|v| {
            let (mut reach, mut total) = (0u64, 0u64);
            for d in g.bfs_distances(v) {
                if d != u32::MAX && d > 0 {
                    reach += 1;
                    total += d as u64;
                }
            }
            if total == 0 {
                0.0
            } else {
                let r = reach as f64;
                (r / (n - 1) as f64) * (r / total as f64)
            }
        })
        .collect()
}

/// Brandes single-source accumulation; adds each node's dependency on
/// `source` into `acc`.
fn accumulate_dependencies(
    g: &PlayerGraph,
    source: PlayerIdx,
    acc: &mut [f64],
    work: &mut BrandesWork,
) {
    let BrandesWork {
        order,
        sigma,
        dist,
        delta,
        queue,
    } = work;
    order.clear();
    queue.clear();
    sigma[source as usize] = 1.0;
    dist[source as usize] = 0;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let dv = dist[v as usize];
        for &(w, _) in g.neighbors(v) {
            let wi = w as usize;
            if dist[wi] == u32::MAX {
                dist[wi] = dv + 1;
                queue.push_back(w);
            }
            if dist[wi] == dv + 1 {
                sigma[wi] += sigma[v as usize];
            }
        }
    }
    for &w in order.iter().rev() {
        let wi = w as usize;
        let coeff = (1.0 + delta[wi]) / sigma[wi];
        for &(v, _) in g.neighbors(w) {
            let vi = v as usize;
            if dist[vi] != u32::MAX && dist[vi] + 1 == dist[wi] {
                delta[vi] += sigma[vi] * coeff;
            }
        }
        if w != source {
            acc[wi] += delta[wi];
        }
    }
    for &w in order.iter() {
        let wi = w as usize;
        sigma[wi] = 0.0;
        dist[wi] = u32::MAX;
        delta[wi] = 0.0;
    }
}

struct BrandesWork {
    order: Vec<PlayerIdx>,
    sigma: Vec<f64>,
    dist: Vec<u32>,
    delta: Vec<f64>,
    queue: VecDeque<PlayerIdx>,
}

impl BrandesWork {
    fn new(n: usize) -> Self {
        BrandesWork {
            order: Vec::with_capacity(n),
            sigma: vec![0.0; n],
            dist: vec![u32::MAX; n],
            delta: vec![0.0; n],
            queue: VecDeque::with_capacity(n),
        }
    }
}

/// Exact unweighted betweenness, each unordered pair counted once, no
/// normalization.
///
/// Sources are split into chunks whose boundaries depend only on the node
/// count; chunk partial sums are added in chunk order, so the result is the
/// same for any thread count.
pub fn betweenness_centrality(g: &PlayerGraph) -> Vec<f64> {
    let n = g.node_count();
    if n == 0 {
        return Vec::new();
    }
    let chunk = 64.max(n.div_ceil(128));
    let sources: Vec<PlayerIdx> = (0..n as PlayerIdx).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(chunk)
        .map(|block| {
            let mut acc = vec![0.0; n];
            let mut work = BrandesWork::new(n);
            for &s in block {
                accumulate_dependencies(g, s, &mut acc, &mut work);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    for t in &mut total {
        *t /= 2.0;
    }
    total
}

pub const EIGENVECTOR_TOL: f64 = 1e-8;
pub const EIGENVECTOR_MAX_ITER: usize = 1000;

/// Eigenvector centrality computed per connected component.
///
/// Each component's dominant adjacency eigenvector is found by power
/// iteration on `A + I` (the shift keeps bipartite components from
/// oscillating), scaled to unit length, and multiplied by the component's
/// spectral radius so components of different strength are comparable.
/// Scores are then divided by the global maximum. Isolated nodes score 0.
pub fn eigenvector_centrality(
    g: &PlayerGraph,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, CentralityError> {
    let n = g.node_count();
    if n == 0 {
        return Err(CentralityError::EmptyGraph);
    }
    let mut scores = vec![0.0; n];
    for comp in g.components() {
        if comp.len() < 2 {
            continue;
        }
        let (vector, radius) = component_eigenvector(g, &comp, tol, max_iter)?;
        for (&v, x) in comp.iter().zip(vector) {
            scores[v as usize] = radius * x;
        }
    }
    let max = scores.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for s in &mut scores {
            *s /= max;
        }
    }
    Ok(scores)
}

fn component_eigenvector(
    g: &PlayerGraph,
    comp: &[PlayerIdx],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64), CentralityError> {
    let local = |v: PlayerIdx| comp.binary_search(&v).expect("neighbor in component");
    let neighbors: Vec<Vec<usize>> = comp
        .iter()
        .map(|&v| g.neighbors(v).iter().map(|&(w, _)| local(w)).collect())
        .collect();
    let m = comp.len();
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    let mut next = vec![0.0; m];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        for (i, nbrs) in neighbors.iter().enumerate() {
            next[i] = x[i] + nbrs.iter().map(|&j| x[j]).sum::<f64>();
        }
        let norm = next.iter().map(|y| y * y).sum::<f64>().sqrt();
        residual = 0.0;
        for (xi, yi) in x.iter_mut().zip(&next) {
            let y = yi / norm;
            residual = f64::max(residual, (y - *xi).abs());
            *xi = y;
        }
        if residual < tol {
            let radius: f64 = neighbors
                .iter()
                .enumerate()
                .map(|(i, nbrs)| x[i] * nbrs.iter().map(|&j| x[j]).sum::<f64>())
                .sum();
            return Ok((x, radius));
        }
    }
    Err(CentralityError::NonConvergence {
        measure: Measure::Eigenvector,
        iterations: max_iter,
        residual,
    })
}

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOL: f64 = 1e-9;
pub const PAGERANK_MAX_ITER: usize = 200;

/// PageRank with each undirected edge followed in both directions, uniform
/// teleport, and isolated-node mass spread uniformly. Stops when the L1
/// change between iterates falls below `tol`.
pub fn pagerank(
    g: &PlayerGraph,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, CentralityError> {
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let out_degree: Vec<f64> = (0..n as PlayerIdx).map(|v| g.degree(v) as f64).collect();
    let mut x = vec![1.0 / nf; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let dangling: f64 = x
            .iter()
            .zip(&out_degree)
            .filter(|(_, &d)| d == 0.0)
            .map(|(xi, _)| xi)
            .sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        let next: Vec<f64> = (0..n as PlayerIdx)
            .into_par_iter()
            .map(|v| {
                base + damping
                    * g.neighbors(v)
                        .iter()
                        .map(|&(w, _)| x[w as usize] / out_degree[w as usize])
                        .sum::<f64>()
            })
            .collect();
        residual = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if residual < tol {
            let total: f64 = x.iter().sum();
            for xi in &mut x {
                *xi /= total;
            }
            return Ok(x);
        }
    }
    Err(CentralityError::NonConvergence {
        measure: Measure::PageRank,
        iterations: max_iter,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralityConfig {
    pub eigenvector_tol: f64,
    pub eigenvector_max_iter: usize,
    pub damping: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iter: usize,
}

impl Default for CentralityConfig {
    fn default() -> Self {
        CentralityConfig {
            eigenvector_tol: EIGENVECTOR_TOL,
            eigenvector_max_iter: EIGENVECTOR_MAX_ITER,
            damping: PAGERANK_DAMPING,
            pagerank_tol: PAGERANK_TOL,
            pagerank_max_iter: PAGERANK_MAX_ITER,
        }
    }
}

/// All five measures, indexed like the graph's roster.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    pub roster: Roster,
    pub degree: Vec<f64>,
    pub closeness: Vec<f64>,
    pub betweenness: Vec<f64>,
    pub eigenvector: Vec<f64>,
    pub pagerank: Vec<f64>,
}

impl CentralityScores {
    pub fn compute(g: &PlayerGraph, config: &CentralityConfig) -> Result<Self, CentralityError> {
        let eigenvector = if g.node_count() == 0 {
            Vec::new()
        } else {
            eigenvector_centrality(g, config.eigenvector_tol, config.eigenvector_max_iter)?
        };
        Ok(CentralityScores {
            roster: g.roster().clone(),
            degree: degree_centrality(g),
            closeness: closeness_centrality(g),
            betweenness: betweenness_centrality(g),
            eigenvector,
            pagerank: pagerank(
                g,
                config.damping,
                config.pagerank_tol,
                config.pagerank_max_iter,
            )?,
        })
    }

    pub fn get(&self, measure: Measure) -> &[f64] {
        match measure {
            Measure::Degree => &self.degree,
            Measure::Closeness => &self.closeness,
            Measure::Betweenness => &self.betweenness,
            Measure::Eigenvector => &self.eigenvector,
            Measure::PageRank => &self.pagerank,
        }
    }

    pub fn len(&self) -> usize {
        self.roster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roster.is_empty()
    }
}

pub const DEFAULT_CENTRAL_QUANTILE: f64 = 0.90;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralSelection {
    pub quantile: f64,
    /// Per-measure score threshold at `quantile`.
    pub thresholds: Vec<(Measure, f64)>,
    pub players: BTreeSet<String>,
}

/// Players scoring at or above the `quantile` threshold of every measure.
pub fn select_central_players(
    scores: &CentralityScores,
    quantile: f64,
) -> Result<CentralSelection, CentralityError> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(CentralityError::InvalidQuantile(quantile));
    }
    if scores.is_empty() {
        return Ok(CentralSelection {
            quantile,
            thresholds: Vec::new(),
            players: BTreeSet::new(),
        });
    }
    let thresholds: Vec<(Measure, f64)> = Measure::ALL
        .iter()
        .map(|&m| {
            let mut sorted = scores.get(m).to_vec();
            sorted.sort_by(f64::total_cmp);
            (m, quantile_sorted(&sorted, quantile))
        })
        .collect();
    let players = (0..scores.len())
        .filter(|&v| thresholds.iter().all(|&(m, t)| scores.get(m)[v] >= t))
        .map(|v| scores.roster.id(v as PlayerIdx).to_string())
        .collect();
    Ok(CentralSelection {
        quantile,
        thresholds,
        players,
    })
}
