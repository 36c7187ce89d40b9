//! End-to-end analysis of a parsed match log.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::centrality::{
    select_central_players, CentralSelection, CentralityConfig, CentralityError, CentralityScores,
    DEFAULT_CENTRAL_QUANTILE,
};
use crate::graph::{
    build_static_graph, graph_summary, GraphSummary, PlayerGraph, PlayerIdx, Roster,
    DEFAULT_EXACT_PATHS_LIMIT,
};
use crate::influence::{
    compute_ledger, node_influence, retention_transfer_all, select_influential,
    EdgeInfluenceLedger, InfluenceConfig, InfluenceError, InfluentialSelection, NodeInfluence,
    RetentionTransfer, DEFAULT_INFLUENTIAL_QUANTILES,
};
use crate::ingest::{filter_short_lived_players, IngestError, MatchRecord};
use crate::stats::{compare_groups, GroupReport, PlayerMetrics, StatsError};
use crate::temporal::{
    build_snapshots, granularity_report, Granularity, GranularityReport, SnapshotSeries,
    DEFAULT_PEAK_THRESHOLD,
};

pub const DEFAULT_MIN_WEEKS: usize = 5;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Centrality(#[from] CentralityError),
    #[error(transparent)]
    Influence(#[from] InfluenceError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("no players left after filtering")]
    EmptyCorpus,
    #[error("invalid run config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub granularity: Granularity,
    pub influence: InfluenceConfig,
    pub peak_threshold: f64,
    pub central_quantile: f64,
    pub influential_quantiles: Vec<f64>,
    pub min_weeks: usize,
    pub exact_paths_limit: usize,
    pub seed: u64,
    #[serde(skip)]
    pub centrality: CentralityConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            granularity: Granularity::Week,
            influence: InfluenceConfig::default(),
            peak_threshold: DEFAULT_PEAK_THRESHOLD,
            central_quantile: DEFAULT_CENTRAL_QUANTILE,
            influential_quantiles: DEFAULT_INFLUENTIAL_QUANTILES.to_vec(),
            min_weeks: DEFAULT_MIN_WEEKS,
            exact_paths_limit: DEFAULT_EXACT_PATHS_LIMIT,
            seed: DEFAULT_SEED,
            centrality: CentralityConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let in_unit = |q: f64| q > 0.0 && q < 1.0;
        if !in_unit(self.central_quantile) {
            return Err(PipelineError::InvalidConfig(format!(
                "central quantile {} is outside (0, 1)",
                self.central_quantile
            )));
        }
        if let Some(q) = self.influential_quantiles.iter().find(|&&q| !in_unit(q)) {
            return Err(PipelineError::InvalidConfig(format!(
                "influential quantile {q} is outside (0, 1)"
            )));
        }
        if !(self.peak_threshold >= 0.0 && self.peak_threshold.is_finite()) {
            return Err(PipelineError::InvalidConfig(
                "peak threshold must be >= 0".into(),
            ));
        }
        self.influence.validate()?;
        Ok(())
    }
}

/// Comparison of the central set against one influential set. `report` is
/// `Err` with a note when a group is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileComparison {
    pub quantile: f64,
    pub report: Result<GroupReport, String>,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub config: RunConfig,
    pub records: Vec<MatchRecord>,
    pub retained_players: usize,
    pub excluded_players: usize,
    pub graph: PlayerGraph,
    pub summary: GraphSummary,
    pub granularity: GranularityReport,
    pub centrality: CentralityScores,
    pub central: CentralSelection,
    pub series: SnapshotSeries,
    pub ledger: EdgeInfluenceLedger,
    pub nodes: Vec<NodeInfluence>,
    pub retention: Vec<Option<RetentionTransfer>>,
    pub influential: Vec<InfluentialSelection>,
    pub metrics: BTreeMap<String, PlayerMetrics>,
    pub comparisons: Vec<QuantileComparison>,
}

/// Mean weight of a player's edges, 0 for isolated players.
pub fn avg_weighted_degree(g: &PlayerGraph, v: PlayerIdx) -> f64 {
    match g.degree(v) {
        0 => 0.0,
        d => g.strength(v) as f64 / d as f64,
    }
}

/// Filters short-lived players, then runs every analysis on what remains.
pub fn analyze(records: &[MatchRecord], config: &RunConfig) -> Result<Analysis, PipelineError> {
    config.validate()?;
    let filtered = filter_short_lived_players(records, config.min_weeks)?;
    let records = filtered.records;
    if records.is_empty() {
        return Err(PipelineError::EmptyCorpus);
    }
    let graph = build_static_graph(&records);
    let summary = graph_summary(&graph, config.exact_paths_limit, config.seed);
    let granularity = granularity_report(&records, config.peak_threshold);
    let centrality = CentralityScores::compute(&graph, &config.centrality)?;
    let central = select_central_players(&centrality, config.central_quantile)?;

    let series = build_snapshots(&records, config.granularity);
    let ledger = compute_ledger(&series, config.influence)?;
    let nodes = node_influence(&ledger, &series);
    let retention = retention_transfer_all(&series);
    let roster = series.roster();
    let influential = config
        .influential_quantiles
        .iter()
        .map(|&q| select_influential(roster, &nodes, q))
        .collect::<Result<Vec<_>, _>>()?;

    let metrics: BTreeMap<String, PlayerMetrics> = (0..roster.len())
        .map(|i| {
            let id = roster.id(i as PlayerIdx);
            let v = graph
                .roster()
                .index_of(id)
                .expect("rosters share the records") as usize;
            let m = PlayerMetrics {
                influence: nodes[i].influence,
                edge_sd: nodes[i].edge_sd,
                degree: centrality.degree[v],
                closeness: centrality.closeness[v],
                betweenness: centrality.betweenness[v],
                eigenvector: centrality.eigenvector[v],
                pagerank: centrality.pagerank[v],
                avg_weighted_degree: avg_weighted_degree(&graph, v as PlayerIdx),
                retention_transfer: retention[i].map(|r| r.value),
            };
            (id.to_string(), m)
        })
        .collect();

    let comparisons = compare_by_quantile(&central.players, &influential, &metrics)?;

    Ok(Analysis {
        config: config.clone(),
        retained_players: filtered.retained.len(),
        excluded_players: filtered.excluded.len(),
        records,
        graph,
        summary,
        granularity,
        centrality,
        central,
        series,
        ledger,
        nodes,
        retention,
        influential,
        metrics,
        comparisons,
    })
}

/// Runs the group comparison of `central` against each influential set.
/// An empty group yields a note instead of a report.
pub fn compare_by_quantile(
    central: &BTreeSet<String>,
    influential: &[InfluentialSelection],
    metrics: &BTreeMap<String, PlayerMetrics>,
) -> Result<Vec<QuantileComparison>, StatsError> {
    influential
        .iter()
        .map(|sel| {
            let report = match compare_groups(central, &sel.players, metrics) {
                Ok(r) => Ok(r),
                Err(e @ StatsError::EmptyGroup(_)) => Err(e.to_string()),
                Err(e) => return Err(e),
            };
            Ok(QuantileComparison {
                quantile: sel.quantile,
                report,
            })
        })
        .collect()
}

/// Influential sets recomputed from saved per-player influence scores.
pub fn influential_from_metrics(
    metrics: &BTreeMap<String, PlayerMetrics>,
    quantiles: &[f64],
) -> Result<Vec<InfluentialSelection>, InfluenceError> {
    let roster = Roster::from_ids(metrics.keys().cloned());
    let nodes: Vec<NodeInfluence> = metrics
        .values()
        .map(|m| NodeInfluence {
            influence: m.influence,
            edge_sd: m.edge_sd,
            temporal_degree: 0,
        })
        .collect();
    quantiles
        .iter()
        .map(|&q| select_influential(&roster, &nodes, q))
        .collect()
}
