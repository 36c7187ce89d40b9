//! Snapshot discretization of the corpus, per-snapshot participation
//! features, and the stability diagnostics (peaks, slope, RSD) used to pick a
//! snapshot granularity.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{edge_key, for_each_teammate_pair, PlayerIdx, Roster};
use crate::ingest::MatchRecord;
use crate::stats::{descriptive, mean, population_sd, Descriptive};
use crate::time::{TimeGrid, DAY_SECONDS, MONTH_SECONDS, WEEK_SECONDS};

#[derive(Debug, Error, PartialEq)]
pub enum TemporalError {
    #[error("player '{0}' does not appear in any snapshot")]
    UnknownPlayer(String),
    #[error("slope needs at least two points, got {0}")]
    UndefinedSlope(usize),
    #[error("relative standard deviation is undefined for a zero-mean series")]
    UndefinedRsd,
    #[error("unknown granularity '{0}' (expected day, week or month)")]
    UnknownGranularity(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Day,
    Week,
    /// Four weeks.
    Month,
}

impl Granularity {
    pub const ALL: [Granularity; 3] = [Granularity::Day, Granularity::Week, Granularity::Month];

    pub fn seconds(self) -> i64 {
        match self {
            Granularity::Day => DAY_SECONDS,
            Granularity::Week => WEEK_SECONDS,
            Granularity::Month => MONTH_SECONDS,
        }
    }

    pub fn grid(self) -> TimeGrid {
        TimeGrid::new(self.seconds())
    }

    pub fn name(self) -> &'static str {
        match self {
            Granularity::Day => "day",
            Granularity::Week => "week",
            Granularity::Month => "month",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Granularity {
    type Err = TemporalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "day" => Ok(Granularity::Day),
            "week" => Ok(Granularity::Week),
            "month" => Ok(Granularity::Month),
            other => Err(TemporalError::UnknownGranularity(other.to_string())),
        }
    }
}

/// A player's behavior within one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ParticipationVector {
    pub matches_count: u32,
    /// Mean start-to-start gap between consecutive matches, 0 with fewer than
    /// two matches.
    pub avg_inter_match_gap: f64,
    pub avg_match_seconds: f64,
    pub completion_rate: f64,
}

impl ParticipationVector {
    pub const FEATURES: usize = 4;
    pub const FEATURE_NAMES: [&'static str; 4] = [
        "matches_count",
        "avg_inter_match_gap",
        "avg_match_seconds",
        "completion_rate",
    ];

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_array(&self) -> [f64; 4] {
        [
            self.matches_count as f64,
            self.avg_inter_match_gap,
            self.avg_match_seconds,
            self.completion_rate,
        ]
    }

    /// Computes the vector from `(start_time, seconds_played, completed)`
    /// triples of one player's matches in one snapshot.
    pub fn from_plays(plays: &mut [(i64, u64, bool)]) -> Self {
        if plays.is_empty() {
            return Self::zero();
        }
        plays.sort_unstable();
        let n = plays.len();
        let gap = if n < 2 {
            0.0
        } else {
            let total: i64 = plays.windows(2).map(|w| w[1].0 - w[0].0).sum();
            total as f64 / (n - 1) as f64
        };
        let seconds: u64 = plays.iter().map(|p| p.1).sum();
        let completed = plays.iter().filter(|p| p.2).count();
        ParticipationVector {
            matches_count: n as u32,
            avg_inter_match_gap: gap,
            avg_match_seconds: seconds as f64 / n as f64,
            completion_rate: completed as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub start_time: i64,
    /// Players with at least one match in this snapshot.
    pub players: BTreeMap<PlayerIdx, ParticipationVector>,
    /// Teammate pairs and their shared-match count in this snapshot.
    pub edges: BTreeMap<(PlayerIdx, PlayerIdx), u32>,
}

impl Snapshot {
    pub fn vector(&self, p: PlayerIdx) -> ParticipationVector {
        self.players.get(&p).copied().unwrap_or_default()
    }

    pub fn weight(&self, a: PlayerIdx, b: PlayerIdx) -> u32 {
        self.edges.get(&edge_key(a, b)).copied().unwrap_or(0)
    }
}

/// Ordered, gap-free snapshots covering the corpus window.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSeries {
    granularity: Granularity,
    roster: Roster,
    snapshots: Vec<Snapshot>,
}

/// First and last snapshot (inclusive) in which a player is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActiveSpan {
    pub first: usize,
    pub last: usize,
}

impl ActiveSpan {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// `(start_time, seconds_played, completed)` of one player in one match.
type Play = (i64, u64, bool);

/// Bins every match into one snapshot by start time and computes the
/// per-snapshot participation vectors and teammate counts.
pub fn build_snapshots(records: &[MatchRecord], granularity: Granularity) -> SnapshotSeries {
    let roster = Roster::from_records(records);
    let grid = granularity.grid();
    let Some((first_bin, last_bin)) = records
        .iter()
        .map(|r| grid.bin_of(r.start_time))
        .fold(None, |acc: Option<(i64, i64)>, b| {
            Some(acc.map_or((b, b), |(lo, hi)| (lo.min(b), hi.max(b))))
        })
    else {
        return SnapshotSeries {
            granularity,
            roster,
            snapshots: Vec::new(),
        };
    };
    let k = (last_bin - first_bin + 1) as usize;
    let mut plays: Vec<BTreeMap<PlayerIdx, Vec<Play>>> = vec![BTreeMap::new(); k];
    let mut snapshots: Vec<Snapshot> = (0..k)
        .map(|t| Snapshot {
            start_time: grid.bin_start(first_bin + t as i64),
            ..Default::default()
        })
        .collect();
    for r in records {
        let t = (grid.bin_of(r.start_time) - first_bin) as usize;
        for p in r.participants() {
            let idx = roster
                .index_of(&p.player_id)
                .expect("roster built from records");
            plays[t]
                .entry(idx)
                .or_default()
                .push((r.start_time, p.seconds_played, p.completed));
        }
        let edges = &mut snapshots[t].edges;
        for_each_teammate_pair(r, &roster, |a, b| {
            *edges.entry(edge_key(a, b)).or_insert(0) += 1;
        });
    }
    for (snap, mut per_player) in snapshots.iter_mut().zip(plays) {
        snap.players = per_player
            .iter_mut()
            .map(|(&p, v)| (p, ParticipationVector::from_plays(v)))
            .collect();
    }
    SnapshotSeries {
        granularity,
        roster,
        snapshots,
    }
}

impl SnapshotSeries {
    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn roster(&self) -> &Roster {
        &self.roster
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Active span of every roster player, indexed by player.
    pub fn active_spans(&self) -> Vec<Option<ActiveSpan>> {
        let mut spans: Vec<Option<ActiveSpan>> = vec![None; self.roster.len()];
        for (t, snap) in self.snapshots.iter().enumerate() {
            for &p in snap.players.keys() {
                let span = &mut spans[p as usize];
                match span {
                    Some(s) => s.last = t,
                    None => *span = Some(ActiveSpan { first: t, last: t }),
                }
            }
        }
        spans
    }

    /// Feature `feature` of player `p` over `span`, zero where inactive.
    pub fn feature_series(&self, p: PlayerIdx, span: ActiveSpan, feature: usize) -> Vec<f64> {
        self.snapshots[span.first..=span.last]
            .iter()
            .map(|s| s.vector(p).to_array()[feature])
            .collect()
    }

    fn activity_of(&self, p: PlayerIdx, span: ActiveSpan) -> Vec<f64> {
        self.feature_series(p, span, 0)
    }
}

/// Matches played per snapshot, from the player's first to last active
/// snapshot. Inactive snapshots inside the span count as zero.
pub fn activity_series(series: &SnapshotSeries, player: &str) -> Result<Vec<f64>, TemporalError> {
    let unknown = || TemporalError::UnknownPlayer(player.to_string());
    let p = series.roster().index_of(player).ok_or_else(unknown)?;
    let span = series.active_spans()[p as usize].ok_or_else(unknown)?;
    Ok(series.activity_of(p, span))
}

pub const DEFAULT_PEAK_THRESHOLD: f64 = 0.5;

/// Counts interior local extrema whose jump from the previous point exceeds
/// `rel_threshold * max(series)`.
pub fn count_peaks(series: &[f64], rel_threshold: f64) -> usize {
    let Some(max) = series.iter().copied().reduce(f64::max) else {
        return 0;
    };
    if max <= 0.0 {
        return 0;
    }
    let cut = rel_threshold * max;
    series
        .windows(3)
        .filter(|w| {
            let (rise, fall) = (w[1] - w[0], w[2] - w[1]);
            rise * fall < 0.0 && rise.abs() > cut
        })
        .count()
}

/// Ordinary least-squares slope against the snapshot index.
pub fn slope(series: &[f64]) -> Result<f64, TemporalError> {
    let n = series.len();
    if n < 2 {
        return Err(TemporalError::UndefinedSlope(n));
    }
    let x_mean = (n - 1) as f64 / 2.0;
    let y_mean = mean(series);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &y) in series.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

/// Relative standard deviation in percent (population sd over mean).
pub fn rsd(series: &[f64]) -> Result<f64, TemporalError> {
    if series.is_empty() {
        return Err(TemporalError::UndefinedRsd);
    }
    let m = mean(series);
    if m == 0.0 {
        return Err(TemporalError::UndefinedRsd);
    }
    Ok(100.0 * population_sd(series) / m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMetric {
    Peaks,
    Slope,
    RsdPercent,
}

impl StabilityMetric {
    pub fn name(self) -> &'static str {
        match self {
            StabilityMetric::Peaks => "peaks",
            StabilityMetric::Slope => "slope",
            StabilityMetric::RsdPercent => "rsd_percent",
        }
    }
}

/// One row of the granularity table. `stats` is `None` when no player
/// produced a defined value for the metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranularityRow {
    pub granularity: Granularity,
    pub metric: StabilityMetric,
    pub players: usize,
    pub stats: Option<Descriptive>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranularityReport {
    pub peak_threshold: f64,
    pub rows: Vec<GranularityRow>,
}

impl GranularityReport {
    pub fn row(&self, g: Granularity, metric: StabilityMetric) -> Option<&GranularityRow> {
        self.rows
            .iter()
            .find(|r| r.granularity == g && r.metric == metric)
    }

    pub fn median(&self, g: Granularity, metric: StabilityMetric) -> Option<f64> {
        self.row(g, metric)?.stats.map(|d| d.median)
    }
}

/// Per-player stability values at one granularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerStability {
    pub peaks: usize,
    pub slope: Option<f64>,
    /// Mean RSD over the participation features whose series has a nonzero
    /// mean.
    pub rsd: Option<f64>,
}

pub fn player_stability(series: &SnapshotSeries, peak_threshold: f64) -> Vec<PlayerStability> {
    let spans = series.active_spans();
    spans
        .par_iter()
        .enumerate()
        .filter_map(|(p, span)| span.map(|s| (p as PlayerIdx, s)))
        .map(|(p, span)| {
            let activity = series.activity_of(p, span);
            let rsds: Vec<f64> = (0..ParticipationVector::FEATURES)
                .filter_map(|f| rsd(&series.feature_series(p, span, f)).ok())
                .collect();
            PlayerStability {
                peaks: count_peaks(&activity, peak_threshold),
                slope: slope(&activity).ok(),
                rsd: (!rsds.is_empty()).then(|| mean(&rsds)),
            }
        })
        .collect()
}

/// Distribution of peaks, slopes and RSD across players at each granularity.
pub fn granularity_report(records: &[MatchRecord], peak_threshold: f64) -> GranularityReport {
    let mut rows = Vec::new();
    for g in Granularity::ALL {
        let series = build_snapshots(records, g);
        let stability = player_stability(&series, peak_threshold);
        let peaks: Vec<f64> = stability.iter().map(|s| s.peaks as f64).collect();
        let slopes: Vec<f64> = stability.iter().filter_map(|s| s.slope).collect();
        let rsds: Vec<f64> = stability.iter().filter_map(|s| s.rsd).collect();
        for (metric, values) in [
            (StabilityMetric::Peaks, peaks),
            (StabilityMetric::Slope, slopes),
            (StabilityMetric::RsdPercent, rsds),
        ] {
            rows.push(GranularityRow {
                granularity: g,
                metric,
                players: values.len(),
                stats: descriptive(&values).ok(),
            });
        }
    }
    GranularityReport {
        peak_threshold,
        rows,
    }
}
