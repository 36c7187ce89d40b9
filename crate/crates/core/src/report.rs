//! CSV, text and JSON renderings of an [`Analysis`], and the readers the
//! standalone comparison uses.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use crate::centrality::{CentralSelection, CentralityScores};
use crate::graph::{PlayerGraph, PlayerIdx, Roster};
use crate::influence::{
    EdgeInfluenceLedger, InfluentialSelection, NodeInfluence, RetentionTransfer,
};
use crate::ingest::{write_match_log, ParsedLog};
use crate::pipeline::{avg_weighted_degree, Analysis, QuantileComparison};
use crate::stats::{GroupReport, PlayerMetrics};
use crate::temporal::{Granularity, GranularityReport, StabilityMetric};

pub const ALPHA: f64 = 0.05;

pub const CENTRALITY_FILE: &str = "centrality.csv";
pub const INFLUENCE_FILE: &str = "influence_nodes.csv";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: missing column '{column}'")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path} line {line}: bad value '{value}' in column '{column}'")]
    BadValue {
        path: PathBuf,
        line: u64,
        column: String,
        value: String,
    },
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Shortest round-trip text for a float, in exponent form when the plain
/// form would be very long.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

pub fn granularity_csv(report: &GranularityReport) -> String {
    let rows = report.rows.iter().map(|r| {
        let mut row = vec![
            r.granularity.to_string(),
            r.metric.name().to_string(),
            r.players.to_string(),
        ];
        match r.stats {
            Some(d) => row.extend([d.min, d.q25, d.median, d.q75, d.max].map(num)),
            None => row.extend(std::iter::repeat_n(String::new(), 5)),
        }
        row
    });
    csv_string(
        &[
            "granularity",
            "metric",
            "players",
            "min",
            "q25",
            "median",
            "q75",
            "max",
        ],
        rows,
    )
}

pub fn centrality_csv(s: &CentralityScores, central: &CentralSelection, g: &PlayerGraph) -> String {
    let rows = (0..s.len()).map(|v| {
        let id = s.roster.id(v as PlayerIdx);
        vec![
            id.to_string(),
            num(s.degree[v]),
            num(s.closeness[v]),
            num(s.betweenness[v]),
            num(s.eigenvector[v]),
            num(s.pagerank[v]),
            num(avg_weighted_degree(g, v as PlayerIdx)),
            central.players.contains(id).to_string(),
        ]
    });
    csv_string(
        &[
            "player_id",
            "degree",
            "closeness",
            "betweenness",
            "eigenvector",
            "pagerank",
            "avg_weighted_degree",
            "central",
        ],
        rows,
    )
}

pub fn central_thresholds_csv(central: &CentralSelection) -> String {
    let rows = central
        .thresholds
        .iter()
        .map(|(m, t)| vec![m.name().to_string(), num(central.quantile), num(*t)]);
    csv_string(&["measure", "quantile", "threshold"], rows)
}

pub fn ledger_csv(ledger: &EdgeInfluenceLedger) -> String {
    let roster = &ledger.roster;
    let rows = ledger.entries.iter().map(|e| {
        vec![
            roster.id(e.a).to_string(),
            roster.id(e.b).to_string(),
            e.snapshot.to_string(),
            e.weight.to_string(),
            e.credited
                .map_or_else(String::new, |c| roster.id(c).to_string()),
            num(e.value),
        ]
    });
    csv_string(
        &[
            "player_a",
            "player_b",
            "snapshot",
            "weight",
            "credited_player",
            "value",
        ],
        rows,
    )
}

pub fn influence_csv(
    roster: &Roster,
    nodes: &[NodeInfluence],
    retention: &[Option<RetentionTransfer>],
) -> String {
    let rows = nodes.iter().enumerate().map(|(i, n)| {
        vec![
            roster.id(i as PlayerIdx).to_string(),
            num(n.influence),
            num(n.edge_sd),
            n.temporal_degree.to_string(),
            opt(retention[i].map(|r| r.value)),
        ]
    });
    csv_string(
        &[
            "player_id",
            "influence",
            "edge_sd",
            "temporal_degree",
            "retention_transfer",
        ],
        rows,
    )
}

pub fn influential_sets_csv(selections: &[InfluentialSelection]) -> String {
    let rows = selections.iter().flat_map(|sel| {
        sel.players
            .iter()
            .map(move |p| vec![num(sel.quantile), num(sel.threshold), p.clone()])
    });
    csv_string(&["quantile", "threshold", "player_id"], rows)
}

pub fn retention_csv(roster: &Roster, retention: &[Option<RetentionTransfer>]) -> String {
    let rows = retention.iter().enumerate().filter_map(|(i, r)| {
        r.map(|r| {
            vec![
                roster.id(i as PlayerIdx).to_string(),
                num(r.value),
                r.neighbors.to_string(),
            ]
        })
    });
    csv_string(&["player_id", "retention_transfer", "neighbors"], rows)
}

fn decision(significant: bool) -> &'static str {
    if significant {
        "reject"
    } else {
        "retain"
    }
}

pub fn comparison_csv(comparisons: &[QuantileComparison]) -> String {
    let rows = comparisons.iter().flat_map(|qc| {
        let q = num(qc.quantile);
        let reports: Vec<Vec<String>> = match &qc.report {
            Ok(report) => report
                .comparisons
                .iter()
                .map(|c| {
                    vec![
                        q.clone(),
                        c.metric.clone(),
                        c.n_a.to_string(),
                        c.n_b.to_string(),
                        num(c.u),
                        num(c.p_value),
                        c.alternative.to_string(),
                        c.method.to_string(),
                        num(c.mean_a),
                        num(c.mean_b),
                        decision(c.significant(ALPHA)).to_string(),
                    ]
                })
                .collect(),
            Err(_) => Vec::new(),
        };
        reports
    });
    csv_string(
        &[
            "influential_quantile",
            "metric",
            "n_influential",
            "n_central",
            "u",
            "p_value",
            "alternative",
            "method",
            "mean_influential",
            "mean_central",
            "decision",
        ],
        rows,
    )
}

fn report_text(out: &mut String, report: &GroupReport) {
    out.push_str(&format!(
        "central={} influential={} overlap={} disjoint={}\n",
        report.central_size, report.influential_size, report.overlap, report.disjoint
    ));
    for c in &report.comparisons {
        out.push_str(&format!(
            "  {:<20} U={:<10} p={:<12.6e} {:<9} {} at alpha={ALPHA}\n",
            c.metric,
            c.u,
            c.p_value,
            c.alternative,
            decision(c.significant(ALPHA)),
        ));
    }
}

pub fn comparison_text(comparisons: &[QuantileComparison]) -> String {
    let mut out = String::new();
    for qc in comparisons {
        out.push_str(&format!("influential quantile {}\n", qc.quantile));
        match &qc.report {
            Ok(report) => report_text(&mut out, report),
            Err(note) => out.push_str(&format!("  skipped: {note}\n")),
        }
    }
    out
}

/// Deterministic run summary: inputs, sizes and decisions, no timings.
pub fn summary_json(a: &Analysis, skipped: usize) -> serde_json::Value {
    let medians: BTreeMap<String, BTreeMap<&str, Option<f64>>> = Granularity::ALL
        .iter()
        .map(|&g| {
            let row = [
                StabilityMetric::Peaks,
                StabilityMetric::Slope,
                StabilityMetric::RsdPercent,
            ]
            .map(|m| (m.name(), a.granularity.median(g, m)));
            (g.to_string(), row.into_iter().collect())
        })
        .collect();
    let influential: Vec<_> = a
        .influential
        .iter()
        .map(|s| json!({"quantile": s.quantile, "threshold": s.threshold, "size": s.players.len()}))
        .collect();
    let comparisons: Vec<_> = a
        .comparisons
        .iter()
        .map(|qc| match &qc.report {
            Ok(r) => json!({
                "quantile": qc.quantile,
                "overlap": r.overlap,
                "disjoint": r.disjoint,
                "tests": r.comparisons.iter().map(|c| json!({
                    "metric": c.metric,
                    "u": c.u,
                    "p_value": c.p_value,
                    "alternative": c.alternative,
                    "decision": decision(c.significant(ALPHA)),
                })).collect::<Vec<_>>(),
            }),
            Err(note) => json!({"quantile": qc.quantile, "skipped": note}),
        })
        .collect();
    json!({
        "config": a.config,
        "input": {
            "skipped_lines": skipped,
            "matches": a.records.len(),
            "retained_players": a.retained_players,
            "excluded_players": a.excluded_players,
        },
        "graph": a.summary,
        "granularity_medians": medians,
        "snapshots": a.series.len(),
        "ledger_entries": a.ledger.entries.len(),
        "central": {"quantile": a.central.quantile, "size": a.central.players.len()},
        "influential": influential,
        "comparisons": comparisons,
    })
}

fn write(
    dir: &Path,
    name: &str,
    contents: &[u8],
    written: &mut Vec<PathBuf>,
) -> Result<(), ReportError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| ReportError::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

/// Creates `dir` and writes `files` into it, returning the paths.
pub fn write_files(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for (name, contents) in files {
        write(dir, name, contents, &mut written)?;
    }
    Ok(written)
}

pub fn match_log_bytes(records: &[crate::ingest::MatchRecord]) -> Vec<u8> {
    let mut out = Vec::new();
    write_match_log(&mut out, records).expect("in-memory write");
    out
}

/// Writes every report of a pipeline run into `dir` and returns the paths.
pub fn write_all(
    dir: &Path,
    a: &Analysis,
    parsed: &ParsedLog,
) -> Result<Vec<PathBuf>, ReportError> {
    let skip_report = parsed.skip_report();
    let filtered = match_log_bytes(&a.records);
    let summary_pretty =
        serde_json::to_string_pretty(&a.summary).expect("summary serializes") + "\n";
    let run_summary = serde_json::to_string_pretty(&summary_json(a, parsed.skipped.len()))
        .expect("json value")
        + "\n";
    let files: [(&str, Vec<u8>); 14] = [
        ("skip_report.txt", skip_report.into_bytes()),
        ("matches.filtered.jsonl", filtered),
        ("graph_summary.txt", a.summary.to_key_values().into_bytes()),
        ("graph_summary.json", summary_pretty.into_bytes()),
        (
            "granularity.csv",
            granularity_csv(&a.granularity).into_bytes(),
        ),
        (
            CENTRALITY_FILE,
            centrality_csv(&a.centrality, &a.central, &a.graph).into_bytes(),
        ),
        (
            "central_thresholds.csv",
            central_thresholds_csv(&a.central).into_bytes(),
        ),
        ("ledger.csv", ledger_csv(&a.ledger).into_bytes()),
        (
            INFLUENCE_FILE,
            influence_csv(a.series.roster(), &a.nodes, &a.retention).into_bytes(),
        ),
        (
            "influential_sets.csv",
            influential_sets_csv(&a.influential).into_bytes(),
        ),
        (
            "retention.csv",
            retention_csv(a.series.roster(), &a.retention).into_bytes(),
        ),
        (
            "comparison.csv",
            comparison_csv(&a.comparisons).into_bytes(),
        ),
        (
            "comparison.txt",
            comparison_text(&a.comparisons).into_bytes(),
        ),
        ("summary.json", run_summary.into_bytes()),
    ];
    write_files(dir, &files)
}

type Table = Vec<BTreeMap<String, String>>;

fn read_table(path: &Path, required: &[&str]) -> Result<Table, ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    for column in required {
        if !headers.iter().any(|h| h == *column) {
            return Err(ReportError::MissingColumn {
                path: path.to_path_buf(),
                column: column.to_string(),
            });
        }
    }
    reader
        .records()
        .map(|row| {
            let row = row.map_err(csv_err)?;
            Ok(headers
                .iter()
                .zip(row.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect())
        })
        .collect()
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    row: &BTreeMap<String, String>,
    column: &str,
) -> Result<T, ReportError> {
    let value = &row[column];
    value.parse().map_err(|_| ReportError::BadValue {
        path: path.to_path_buf(),
        line: line as u64 + 2,
        column: column.to_string(),
        value: value.clone(),
    })
}

/// Central set and per-player metrics recovered from a pipeline's
/// centrality and influence tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedMetrics {
    pub central: BTreeSet<String>,
    pub metrics: BTreeMap<String, PlayerMetrics>,
}

pub fn read_metrics(dir: &Path) -> Result<SavedMetrics, ReportError> {
    let cpath = dir.join(CENTRALITY_FILE);
    let ipath = dir.join(INFLUENCE_FILE);
    let centrality = read_table(
        &cpath,
        &[
            "player_id",
            "degree",
            "closeness",
            "betweenness",
            "eigenvector",
            "pagerank",
            "avg_weighted_degree",
            "central",
        ],
    )?;
    let influence = read_table(
        &ipath,
        &["player_id", "influence", "edge_sd", "retention_transfer"],
    )?;
    let mut central = BTreeSet::new();
    let mut metrics = BTreeMap::new();
    for (line, row) in centrality.iter().enumerate() {
        let f = |c: &str| parse_field::<f64>(&cpath, line, row, c);
        let id = row["player_id"].clone();
        if parse_field::<bool>(&cpath, line, row, "central")? {
            central.insert(id.clone());
        }
        metrics.insert(
            id,
            PlayerMetrics {
                degree: f("degree")?,
                closeness: f("closeness")?,
                betweenness: f("betweenness")?,
                eigenvector: f("eigenvector")?,
                pagerank: f("pagerank")?,
                avg_weighted_degree: f("avg_weighted_degree")?,
                ..PlayerMetrics::default()
            },
        );
    }
    for (line, row) in influence.iter().enumerate() {
        let m = metrics.entry(row["player_id"].clone()).or_default();
        m.influence = parse_field(&ipath, line, row, "influence")?;
        m.edge_sd = parse_field(&ipath, line, row, "edge_sd")?;
        m.retention_transfer = match row["retention_transfer"].as_str() {
            "" => None,
            _ => Some(parse_field(&ipath, line, row, "retention_transfer")?),
        };
    }
    Ok(SavedMetrics { central, metrics })
}
