//! `playnet`: co-play network analysis from match logs.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use playnet_core::centrality::DEFAULT_CENTRAL_QUANTILE;
use playnet_core::graph::DEFAULT_EXACT_PATHS_LIMIT;
use playnet_core::influence::{DEFAULT_EPSILON, DEFAULT_W0};
use playnet_core::pipeline::{avg_weighted_degree, DEFAULT_MIN_WEEKS, DEFAULT_SEED};
use playnet_core::report::{self, match_log_bytes};
use playnet_core::temporal::DEFAULT_PEAK_THRESHOLD;
use playnet_core::{
    analyze, build_snapshots, build_static_graph, compare_by_quantile, compute_ledger,
    filter_short_lived_players, generate, granularity_report, graph_summary,
    influential_from_metrics, node_influence, parse_match_log, read_metrics,
    retention_transfer_all, select_central_players, select_influential, write_all, write_files,
    CentralityConfig, CentralityScores, Granularity, InfluenceConfig, MatchRecord, ParsedLog,
    RunConfig, SynthConfig,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "playnet",
    version,
    about = "Central versus influential players in co-play networks"
)]
struct Cli {
    /// Worker threads; outputs do not depend on it (configuration, not
    /// prescribed by the method). Defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a match log; write the skip report and the
    /// activity-filtered log.
    Validate(ValidateArgs),
    /// Static co-play graph statistics.
    Summary(SummaryArgs),
    /// Peaks, slope and RSD distributions at day, week and month granularity.
    Granularity(GranularityArgs),
    /// Five centrality measures and the central-player set.
    Centrality(CentralityArgs),
    /// Edge-influence ledger, node influence and influential sets.
    Influence(InfluenceArgs),
    /// Retention transfer per player.
    Retention(RetentionArgs),
    /// Mann-Whitney battery of influential against central players, from the
    /// centrality and influence tables in a results directory.
    Compare(CompareArgs),
    /// Generate a synthetic match log with planted roles.
    Synth(SynthArgs),
    /// Run every stage and write all reports.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct Io {
    /// Line-delimited JSON match log.
    #[arg(long)]
    input: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Drop players active in fewer distinct weeks (method value).
    #[arg(long, default_value_t = DEFAULT_MIN_WEEKS)]
    min_weeks: usize,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    io: Io,
}

#[derive(Args)]
struct SummaryArgs {
    #[command(flatten)]
    io: Io,
    /// Largest component size for exact path statistics; larger components
    /// are sampled (configuration, not prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_EXACT_PATHS_LIMIT)]
    exact_paths_limit: usize,
    /// Seed for sampled path statistics (configuration, not prescribed by the
    /// method).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct GranularityArgs {
    #[command(flatten)]
    io: Io,
    /// Minimum jump, relative to the series maximum, for a peak
    /// (configuration, not prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_PEAK_THRESHOLD)]
    peak_threshold: f64,
}

#[derive(Args)]
struct CentralityArgs {
    #[command(flatten)]
    io: Io,
    /// Per-measure quantile a central player must reach in all five measures
    /// (method value).
    #[arg(long, default_value_t = DEFAULT_CENTRAL_QUANTILE)]
    central_quantile: f64,
}

#[derive(Args)]
struct Behavior {
    /// Snapshot width (method value: week).
    #[arg(long, value_enum, default_value_t = GranularityArg::Week)]
    granularity: GranularityArg,
}

#[derive(Args)]
struct InfluenceArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    behavior: Behavior,
    /// Scaled L2 distance above which a player's behavior counts as changed
    /// (configuration, not prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Co-play count at which the logarithmic weight adjustment saturates
    /// (configuration, not prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_W0)]
    w0: f64,
    /// Influence quantiles defining influential sets (method values).
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.99,0.999")]
    influential_quantiles: Vec<f64>,
}

#[derive(Args)]
struct RetentionArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    behavior: Behavior,
}

#[derive(Args)]
struct CompareArgs {
    /// Results directory holding centrality.csv and influence_nodes.csv.
    #[arg(long)]
    input: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Influence quantiles defining influential sets (method values).
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.99,0.999")]
    influential_quantiles: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// 1000 players, 20 weeks, 10 influencers with 8 followers, 10 hubs.
    Default,
    /// 10k players, 48 weeks, about 26k co-play edges.
    Desk,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for matches.jsonl and ground_truth.csv.
    #[arg(long)]
    out: PathBuf,
    /// Generator seed (configuration, not prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Base configuration (configuration, not prescribed by the method).
    #[arg(long, value_enum, default_value_t = Preset::Default)]
    preset: Preset,
    /// Population size (configuration, not prescribed by the method).
    #[arg(long)]
    players: Option<usize>,
    /// Number of weekly snapshots (configuration, not prescribed by the
    /// method).
    #[arg(long)]
    weeks: Option<usize>,
    /// Planted influencers (configuration, not prescribed by the method).
    #[arg(long)]
    influencers: Option<usize>,
    /// Followers per influencer (configuration, not prescribed by the
    /// method).
    #[arg(long)]
    followers: Option<usize>,
    /// Planted hubs (configuration, not prescribed by the method).
    #[arg(long)]
    hubs: Option<usize>,
    /// Follower convergence per week in [0, 1] (configuration, not prescribed
    /// by the method).
    #[arg(long)]
    mimic_rate: Option<f64>,
    /// Relative behavior noise (configuration, not prescribed by the method).
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    io: Io,
    #[command(flatten)]
    behavior: Behavior,
    /// Scaled L2 distance above which a player's behavior counts as changed
    /// (configuration, not prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Co-play count at which the logarithmic weight adjustment saturates
    /// (configuration, not prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_W0)]
    w0: f64,
    /// Minimum jump, relative to the series maximum, for a peak
    /// (configuration, not prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_PEAK_THRESHOLD)]
    peak_threshold: f64,
    /// Per-measure quantile a central player must reach in all five measures
    /// (method value).
    #[arg(long, default_value_t = DEFAULT_CENTRAL_QUANTILE)]
    central_quantile: f64,
    /// Influence quantiles defining influential sets (method values).
    #[arg(long, value_delimiter = ',', default_value = "0.9,0.99,0.999")]
    influential_quantiles: Vec<f64>,
    /// Seed for sampled path statistics (configuration, not prescribed by the
    /// method).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Largest component size for exact path statistics (configuration, not
    /// prescribed by the method).
    #[arg(long, default_value_t = DEFAULT_EXACT_PATHS_LIMIT)]
    exact_paths_limit: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    Day,
    Week,
    Month,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Day => Granularity::Day,
            GranularityArg::Week => Granularity::Week,
            GranularityArg::Month => Granularity::Month,
        }
    }
}

fn load(path: &Path) -> Result<ParsedLog> {
    let file =
        File::open(path).with_context(|| format!("ingest: cannot open {}", path.display()))?;
    parse_match_log(BufReader::new(file)).context("ingest")
}

fn load_filtered(io: &Io) -> Result<Vec<MatchRecord>> {
    let parsed = load(&io.input)?;
    let outcome = filter_short_lived_players(&parsed.records, io.min_weeks).context("ingest")?;
    anyhow::ensure!(
        !outcome.records.is_empty(),
        "ingest: no players left after filtering"
    );
    Ok(outcome.records)
}

fn write(dir: &Path, files: &[(&str, Vec<u8>)]) -> Result<()> {
    write_files(dir, files).context("report")?;
    Ok(())
}

fn emit(summary: serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(&summary).expect("json value")
    );
}

fn validate(args: ValidateArgs) -> Result<()> {
    let parsed = load(&args.io.input)?;
    let outcome =
        filter_short_lived_players(&parsed.records, args.io.min_weeks).context("ingest")?;
    write(
        &args.io.out,
        &[
            ("skip_report.txt", parsed.skip_report().into_bytes()),
            ("matches.filtered.jsonl", match_log_bytes(&outcome.records)),
        ],
    )?;
    emit(json!({
        "records": parsed.records.len(),
        "skipped_lines": parsed.skipped.len(),
        "retained_players": outcome.retained.len(),
        "excluded_players": outcome.excluded.len(),
        "filtered_matches": outcome.records.len(),
    }));
    Ok(())
}

fn summary(args: SummaryArgs) -> Result<()> {
    let records = load_filtered(&args.io)?;
    let g = build_static_graph(&records);
    let s = graph_summary(&g, args.exact_paths_limit, args.seed);
    let pretty = serde_json::to_string_pretty(&s).expect("summary serializes") + "\n";
    write(
        &args.io.out,
        &[
            ("graph_summary.txt", s.to_key_values().into_bytes()),
            ("graph_summary.json", pretty.into_bytes()),
        ],
    )?;
    emit(json!(s));
    Ok(())
}

fn granularity(args: GranularityArgs) -> Result<()> {
    let records = load_filtered(&args.io)?;
    anyhow::ensure!(
        args.peak_threshold >= 0.0 && args.peak_threshold.is_finite(),
        "temporal: peak threshold must be >= 0"
    );
    let table = granularity_report(&records, args.peak_threshold);
    let csv = report::granularity_csv(&table);
    write(
        &args.io.out,
        &[("granularity.csv", csv.clone().into_bytes())],
    )?;
    print!("{csv}");
    Ok(())
}

fn centrality(args: CentralityArgs) -> Result<()> {
    let records = load_filtered(&args.io)?;
    let g = build_static_graph(&records);
    let scores =
        CentralityScores::compute(&g, &CentralityConfig::default()).context("centrality")?;
    let central = select_central_players(&scores, args.central_quantile).context("centrality")?;
    write(
        &args.io.out,
        &[
            (
                report::CENTRALITY_FILE,
                report::centrality_csv(&scores, &central, &g).into_bytes(),
            ),
            (
                "central_thresholds.csv",
                report::central_thresholds_csv(&central).into_bytes(),
            ),
        ],
    )?;
    let top_weight = (0..g.node_count() as u32)
        .map(|v| avg_weighted_degree(&g, v))
        .fold(0.0, f64::max);
    emit(json!({
        "players": scores.len(),
        "central_quantile": central.quantile,
        "central_players": central.players.len(),
        "max_avg_weighted_degree": top_weight,
    }));
    Ok(())
}

fn influence_config(epsilon: f64, w0: f64) -> InfluenceConfig {
    InfluenceConfig { epsilon, w0 }
}

fn influence(args: InfluenceArgs) -> Result<()> {
    let records = load_filtered(&args.io)?;
    let series = build_snapshots(&records, args.behavior.granularity.into());
    let ledger =
        compute_ledger(&series, influence_config(args.epsilon, args.w0)).context("influence")?;
    let nodes = node_influence(&ledger, &series);
    let retention = retention_transfer_all(&series);
    let selections = args
        .influential_quantiles
        .iter()
        .map(|&q| select_influential(series.roster(), &nodes, q))
        .collect::<Result<Vec<_>, _>>()
        .context("influence")?;
    write(
        &args.io.out,
        &[
            ("ledger.csv", report::ledger_csv(&ledger).into_bytes()),
            (
                report::INFLUENCE_FILE,
                report::influence_csv(series.roster(), &nodes, &retention).into_bytes(),
            ),
            (
                "influential_sets.csv",
                report::influential_sets_csv(&selections).into_bytes(),
            ),
        ],
    )?;
    let sets: Vec<_> = selections
        .iter()
        .map(|s| json!({"quantile": s.quantile, "threshold": s.threshold, "size": s.players.len()}))
        .collect();
    emit(json!({
        "snapshots": series.len(),
        "ledger_entries": ledger.entries.len(),
        "influential": sets,
    }));
    Ok(())
}

fn retention(args: RetentionArgs) -> Result<()> {
    let records = load_filtered(&args.io)?;
    let series = build_snapshots(&records, args.behavior.granularity.into());
    let rt = retention_transfer_all(&series);
    write(
        &args.io.out,
        &[(
            "retention.csv",
            report::retention_csv(series.roster(), &rt).into_bytes(),
        )],
    )?;
    emit(json!({
        "snapshots": series.len(),
        "players_with_neighbors": rt.iter().filter(|r| r.is_some()).count(),
    }));
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let saved = read_metrics(&args.input).context("compare")?;
    let selections = influential_from_metrics(&saved.metrics, &args.influential_quantiles)
        .context("influence")?;
    let comparisons =
        compare_by_quantile(&saved.central, &selections, &saved.metrics).context("stats")?;
    let text = report::comparison_text(&comparisons);
    write(
        &args.out,
        &[
            (
                "comparison.csv",
                report::comparison_csv(&comparisons).into_bytes(),
            ),
            ("comparison.txt", text.clone().into_bytes()),
        ],
    )?;
    print!("{text}");
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let mut config = match args.preset {
        Preset::Default => SynthConfig {
            seed: args.seed,
            ..SynthConfig::default()
        },
        Preset::Desk => SynthConfig::desk_scale(args.seed),
    };
    if let Some(v) = args.players {
        config.players = v;
    }
    if let Some(v) = args.weeks {
        config.weeks = v;
    }
    if let Some(v) = args.influencers {
        config.influencers = v;
    }
    if let Some(v) = args.followers {
        config.followers_per_influencer = v;
    }
    if let Some(v) = args.hubs {
        config.hubs = v;
    }
    if let Some(v) = args.mimic_rate {
        config.mimic_rate = v;
    }
    if let Some(v) = args.noise {
        config.noise = v;
    }
    let corpus = generate(&config).context("synth")?;
    write(
        &args.out,
        &[
            ("matches.jsonl", match_log_bytes(&corpus.records)),
            ("ground_truth.csv", corpus.truth.to_csv().into_bytes()),
        ],
    )?;
    emit(json!({
        "config": config,
        "matches": corpus.records.len(),
        "players": corpus.truth.roles.len(),
        "dropped_sessions": corpus.dropped_sessions,
    }));
    Ok(())
}

fn pipeline(args: PipelineArgs) -> Result<()> {
    let parsed = load(&args.io.input)?;
    let config = RunConfig {
        granularity: args.behavior.granularity.into(),
        influence: influence_config(args.epsilon, args.w0),
        peak_threshold: args.peak_threshold,
        central_quantile: args.central_quantile,
        influential_quantiles: args.influential_quantiles,
        min_weeks: args.io.min_weeks,
        exact_paths_limit: args.exact_paths_limit,
        seed: args.seed,
        centrality: CentralityConfig::default(),
    };
    let analysis = analyze(&parsed.records, &config).context("pipeline")?;
    write_all(&args.io.out, &analysis, &parsed).context("report")?;
    print!("{}", report::comparison_text(&analysis.comparisons));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        anyhow::ensure!(n >= 1, "--threads must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool")?;
    }
    match cli.command {
        Command::Validate(a) => validate(a),
        Command::Summary(a) => summary(a),
        Command::Granularity(a) => granularity(a),
        Command::Centrality(a) => centrality(a),
        Command::Influence(a) => influence(a),
        Command::Retention(a) => retention(a),
        Command::Compare(a) => compare(a),
        Command::Synth(a) => synth(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
