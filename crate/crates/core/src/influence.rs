//! Temporal influence over the snapshot series.
//!
//! For every teammate pair and every snapshot after the first, the edge
//! influence is the change in cosine similarity of the two players'
//! participation vectors, counted only when exactly one of them changed
//! behavior since the previous snapshot. The value is credited to the player
//! who stayed constant (the one being mimicked) and its negation to the one
//! who moved. Values are damped logarithmically by the pair's co-play count
//! in that snapshot. A player's influence is the mean of its signed entries.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{edge_key, PlayerIdx, Roster};
use crate::stats::{population_sd, quantile_sorted};
use crate::temporal::{ParticipationVector, SnapshotSeries};

#[derive(Debug, Error, PartialEq)]
pub enum InfluenceError {
    #[error("influence needs at least two snapshots, got {0}")]
    InsufficientHistory(usize),
    #[error("player '{0}' is not in the snapshot series")]
    UnknownPlayer(String),
    #[error("player '{0}' has no neighbors, retention transfer is undefined")]
    NoNeighbors(String),
    #[error("quantile must lie strictly between 0 and 1, got {0}")]
    InvalidQuantile(f64),
    #[error("invalid influence configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("no influence scores to select from")]
    NoScores,
}

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_W0: f64 = 10.0;
pub const SCALE_PERCENTILE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfluenceConfig {
    /// Scaled-L2 distance above which a player counts as having changed.
    pub epsilon: f64,
    /// Co-play count at which the weight damping saturates.
    pub w0: f64,
}

impl Default for InfluenceConfig {
    fn default() -> Self {
        InfluenceConfig {
            epsilon: DEFAULT_EPSILON,
            w0: DEFAULT_W0,
        }
    }
}

impl InfluenceConfig {
    pub fn validate(&self) -> Result<(), InfluenceError> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(InfluenceError::InvalidConfig("epsilon must be >= 0"));
        }
        if !(self.w0 > 0.0 && self.w0.is_finite()) {
            return Err(InfluenceError::InvalidConfig("w0 must be > 0"));
        }
        Ok(())
    }
}

pub type ScaledVector = [f64; ParticipationVector::FEATURES];

/// Per-feature divisors: the corpus-wide 95th percentile of each feature
/// over all active (player, snapshot) vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureScale {
    pub caps: ScaledVector,
}

impl FeatureScale {
    pub fn from_series(series: &SnapshotSeries) -> Self {
        let vectors: Vec<ScaledVector> = series
            .snapshots()
            .iter()
            .flat_map(|s| s.players.values().map(|v| v.to_array()))
            .collect();
        let mut caps = [0.0; ParticipationVector::FEATURES];
        if !vectors.is_empty() {
            for (f, cap) in caps.iter_mut().enumerate() {
                let mut column: Vec<f64> = vectors.iter().map(|v| v[f]).collect();
                column.sort_by(f64::total_cmp);
                *cap = quantile_sorted(&column, SCALE_PERCENTILE);
            }
        }
        FeatureScale { caps }
    }

    /// Divides each feature by its cap and clips at 1. Features whose cap is
    /// 0 map to 0.
    pub fn scale(&self, v: &ParticipationVector) -> ScaledVector {
        let raw = v.to_array();
        let mut out = [0.0; ParticipationVector::FEATURES];
        for ((o, x), cap) in out.iter_mut().zip(raw).zip(self.caps) {
            *o = if cap > 0.0 { (x / cap).min(1.0) } else { 0.0 };
        }
        out
    }
}

fn l2_distance(a: &ScaledVector, b: &ScaledVector) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Cosine similarity, 0 when either vector is zero. Clipped to `[0, 1]`,
/// the exact range for nonnegative vectors.
pub fn cosine(a: &ScaledVector, b: &ScaledVector) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(0.0, 1.0)
    }
}

/// Whether a player's scaled behavior moved by more than `epsilon`.
pub fn behavior_changed(prev: &ScaledVector, curr: &ScaledVector, epsilon: f64) -> bool {
    l2_distance(prev, curr) > epsilon
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Endpoint {
    I,
    J,
}

/// Raw influence on edge `(i, j)` between two consecutive snapshots.
///
/// Returns the similarity change and the endpoint it is credited to, or
/// `None` when both or neither endpoint changed.
pub fn edge_influence(
    xi_prev: &ScaledVector,
    xi_curr: &ScaledVector,
    xj_prev: &ScaledVector,
    xj_curr: &ScaledVector,
    epsilon: f64,
) -> Option<(f64, Endpoint)> {
    let i_changed = behavior_changed(xi_prev, xi_curr, epsilon);
    let j_changed = behavior_changed(xj_prev, xj_curr, epsilon);
    if i_changed == j_changed {
        return None;
    }
    let value = cosine(xi_curr, xj_curr) - cosine(xi_prev, xj_prev);
    Some((value, if i_changed { Endpoint::J } else { Endpoint::I }))
}

/// Logarithmic damping by the snapshot co-play count, saturating at `w0`.
pub fn influence_adjust(value: f64, weight: u32, w0: f64) -> f64 {
    if weight == 0 {
        return 0.0;
    }
    let factor = ((1.0 + weight as f64).ln() / (1.0 + w0).ln()).min(1.0);
    value * factor
}

/// One edge at one snapshot. `value` is the adjusted influence credited to
/// `credited`; the other endpoint implicitly holds `-value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub a: PlayerIdx,
    pub b: PlayerIdx,
    pub snapshot: usize,
    pub weight: u32,
    pub credited: Option<PlayerIdx>,
    pub value: f64,
}

impl LedgerEntry {
    /// Signed influence of `p`, one of the two endpoints.
    pub fn value_for(&self, p: PlayerIdx) -> f64 {
        debug_assert!(p == self.a || p == self.b);
        match self.credited {
            Some(c) if c == p => self.value,
            Some(_) => -self.value,
            None => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeInfluenceLedger {
    pub roster: Roster,
    pub snapshots: usize,
    pub config: InfluenceConfig,
    pub scale: FeatureScale,
    /// Sorted by `(a, b, snapshot)`.
    pub entries: Vec<LedgerEntry>,
}

/// Runs the edge-influence pass over every snapshot after the first. An
/// entry is stored for every pair that co-played in that snapshot; pairs
/// absent from a snapshot hold zero influence there.
pub fn compute_ledger(
    series: &SnapshotSeries,
    config: InfluenceConfig,
) -> Result<EdgeInfluenceLedger, InfluenceError> {
    config.validate()?;
    let k = series.len();
    if k < 2 {
        return Err(InfluenceError::InsufficientHistory(k));
    }
    let scale = FeatureScale::from_series(series);
    let snaps = series.snapshots();
    let per_snapshot: Vec<Vec<LedgerEntry>> = (1..k)
        .into_par_iter()
        .map(|t| {
            let (prev, curr) = (&snaps[t - 1], &snaps[t]);
            let mut cache: HashMap<PlayerIdx, (ScaledVector, ScaledVector)> = HashMap::new();
            let mut pair_of = |p: PlayerIdx| {
                *cache
                    .entry(p)
                    .or_insert_with(|| (scale.scale(&prev.vector(p)), scale.scale(&curr.vector(p))))
            };
            curr.edges
                .iter()
                .map(|(&(a, b), &weight)| {
                    let (a_prev, a_curr) = pair_of(a);
                    let (b_prev, b_curr) = pair_of(b);
                    let (credited, value) =
                        match edge_influence(&a_prev, &a_curr, &b_prev, &b_curr, config.epsilon) {
                            Some((raw, side)) => {
                                let who = if side == Endpoint::I { a } else { b };
                                (Some(who), influence_adjust(raw, weight, config.w0))
                            }
                            None => (None, 0.0),
                        };
                    LedgerEntry {
                        a,
                        b,
                        snapshot: t,
                        weight,
                        credited,
                        value,
                    }
                })
                .collect()
        })
        .collect();
    let mut entries: Vec<LedgerEntry> = per_snapshot.into_iter().flatten().collect();
    entries.sort_by_key(|e| (e.a, e.b, e.snapshot));
    Ok(EdgeInfluenceLedger {
        roster: series.roster().clone(),
        snapshots: k,
        config,
        scale,
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NodeInfluence {
    pub influence: f64,
    /// Population sd of the player's per-(edge, snapshot) values.
    pub edge_sd: f64,
    /// Neighbor count summed over the snapshots the ledger covers.
    pub temporal_degree: u64,
}

/// Influence of every roster player: the sum of its signed ledger values
/// divided by its temporal degree (0 when the degree is 0).
pub fn node_influence(ledger: &EdgeInfluenceLedger, series: &SnapshotSeries) -> Vec<NodeInfluence> {
    let n = ledger.roster.len();
    let mut temporal_degree = vec![0u64; n];
    for snap in series.snapshots().iter().skip(1) {
        for &(a, b) in snap.edges.keys() {
            temporal_degree[a as usize] += 1;
            temporal_degree[b as usize] += 1;
        }
    }
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); n];
    for e in &ledger.entries {
        values[e.a as usize].push(e.value_for(e.a));
        values[e.b as usize].push(e.value_for(e.b));
    }
    values
        .iter()
        .zip(temporal_degree)
        .map(|(vals, deg)| {
            if deg == 0 {
                return NodeInfluence::default();
            }
            NodeInfluence {
                influence: vals.iter().sum::<f64>() / deg as f64,
                edge_sd: if vals.is_empty() {
                    0.0
                } else {
                    population_sd(vals)
                },
                temporal_degree: deg,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RetentionTransfer {
    pub value: f64,
    pub neighbors: usize,
}

/// Retention transfer of every roster player, `None` for players without
/// neighbors.
///
/// For each neighbor, gameplay lengths are counted in snapshots from the
/// pair's first co-play to each player's last active snapshot, inclusive;
/// the value is the mean absolute difference over neighbors.
pub fn retention_transfer_all(series: &SnapshotSeries) -> Vec<Option<RetentionTransfer>> {
    let n = series.roster().len();
    let spans = series.active_spans();
    let mut first_contact: HashMap<(PlayerIdx, PlayerIdx), usize> = HashMap::new();
    for (t, snap) in series.snapshots().iter().enumerate() {
        for &pair in snap.edges.keys() {
            first_contact.entry(pair).or_insert(t);
        }
    }
    let mut contacts: Vec<(PlayerIdx, PlayerIdx, usize)> = first_contact
        .into_iter()
        .map(|((a, b), t)| (a, b, t))
        .collect();
    contacts.sort_unstable();
    let mut sums = vec![0u64; n];
    let mut counts = vec![0usize; n];
    for (a, b, t) in contacts {
        let last = |p: PlayerIdx| {
            spans[p as usize]
                .expect("co-playing players are active")
                .last
        };
        let gameplay_a = (last(a) - t + 1) as i64;
        let gameplay_b = (last(b) - t + 1) as i64;
        let diff = (gameplay_a - gameplay_b).unsigned_abs();
        for p in [a, b] {
            sums[p as usize] += diff;
            counts[p as usize] += 1;
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(&s, &c)| {
            (c > 0).then(|| RetentionTransfer {
                value: s as f64 / c as f64,
                neighbors: c,
            })
        })
        .collect()
}

pub fn retention_transfer(
    series: &SnapshotSeries,
    player: &str,
) -> Result<RetentionTransfer, InfluenceError> {
    let p = series
        .roster()
        .index_of(player)
        .ok_or_else(|| InfluenceError::UnknownPlayer(player.to_string()))?;
    retention_transfer_all(series)[p as usize]
        .ok_or_else(|| InfluenceError::NoNeighbors(player.to_string()))
}

pub const DEFAULT_INFLUENTIAL_QUANTILES: [f64; 3] = [0.90, 0.99, 0.999];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfluentialSelection {
    pub quantile: f64,
    pub threshold: f64,
    pub players: BTreeSet<String>,
}

/// Players whose influence is at or above the `quantile` threshold.
pub fn select_influential(
    roster: &Roster,
    scores: &[NodeInfluence],
    quantile: f64,
) -> Result<InfluentialSelection, InfluenceError> {
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(InfluenceError::InvalidQuantile(quantile));
    }
    if scores.is_empty() {
        return Err(InfluenceError::NoScores);
    }
    let mut sorted: Vec<f64> = scores.iter().map(|s| s.influence).collect();
    sorted.sort_by(f64::total_cmp);
    let threshold = quantile_sorted(&sorted, quantile);
    let players = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.influence >= threshold)
        .map(|(i, _)| roster.id(i as PlayerIdx).to_string())
        .collect();
    Ok(InfluentialSelection {
        quantile,
        threshold,
        players,
    })
}

/// Looks up the ledger entry for a pair at a snapshot.
pub fn ledger_entry(
    ledger: &EdgeInfluenceLedger,
    a: PlayerIdx,
    b: PlayerIdx,
    snapshot: usize,
) -> Option<&LedgerEntry> {
    let (a, b) = edge_key(a, b);
    ledger
        .entries
        .binary_search_by_key(&(a, b, snapshot), |e| (e.a, e.b, e.snapshot))
        .ok()
        .map(|i| &ledger.entries[i])
}
