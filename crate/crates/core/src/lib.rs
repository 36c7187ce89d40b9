//! Co-play network analysis for multiplayer match logs: graph construction,
//! temporal snapshots, centrality, behavioral influence, retention transfer,
//! group comparison and synthetic corpora with planted structure.

pub mod centrality;
pub mod graph;
pub mod influence;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod stats;
pub mod synth;
pub mod temporal;
pub mod time;

pub use centrality::{
    select_central_players, CentralSelection, CentralityConfig, CentralityError, CentralityScores,
    Measure,
};
pub use graph::{build_static_graph, graph_summary, GraphSummary, PlayerGraph, PlayerIdx, Roster};
pub use influence::{
    compute_ledger, node_influence, retention_transfer_all, select_influential,
    EdgeInfluenceLedger, InfluenceConfig, InfluenceError, InfluentialSelection, LedgerEntry,
    NodeInfluence, RetentionTransfer,
};
pub use ingest::{
    filter_short_lived_players, parse_match_log, write_match_log, FilterOutcome, IngestError,
    MatchRecord, ParsedLog, PlayerParticipation, SkipReason, SkippedLine,
};
pub use pipeline::{
    analyze, compare_by_quantile, influential_from_metrics, Analysis, PipelineError,
    QuantileComparison, RunConfig,
};
pub use report::{read_metrics, write_all, write_files, ReportError, SavedMetrics};
pub use stats::{
    compare_groups, mann_whitney_u, Alternative, GroupComparison, GroupReport, PValueMethod,
    PlayerMetrics, StatsError, TestMethod,
};
pub use synth::{
    evaluate_recovery, generate, GroundTruth, Recovery, Role, SynthConfig, SynthCorpus, SynthError,
};
pub use temporal::{
    build_snapshots, granularity_report, Granularity, GranularityReport, ParticipationVector,
    Snapshot, SnapshotSeries, TemporalError,
};
