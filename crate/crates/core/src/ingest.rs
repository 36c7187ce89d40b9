//! Match-log ingestion: line-delimited JSON records, validation, and the
//! minimum-activity filter applied before any network is built.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{TimeGrid, WEEK_SECONDS};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read match log: {0}")]
    Io(#[from] std::io::Error),
    #[error("min_weeks must be at least 1")]
    InvalidMinWeeks,
}

/// One player's presence in a match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerParticipation {
    pub player_id: String,
    pub seconds_played: u64,
    pub completed: bool,
}

/// One player-versus-player match.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchRecord {
    pub match_id: String,
    pub start_time: i64,
    pub duration: u64,
    pub team_a: Vec<PlayerParticipation>,
    pub team_b: Vec<PlayerParticipation>,
}

/// Reason a record failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordDefect {
    EmptyTeam(&'static str),
    RepeatedPlayer(String),
    PlaytimeExceedsDuration {
        player_id: String,
        seconds_played: u64,
    },
}

impl fmt::Display for RecordDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecordDefect::EmptyTeam(team) => write!(f, "{team} is empty"),
            RecordDefect::RepeatedPlayer(p) => write!(f, "player {p} appears more than once"),
            RecordDefect::PlaytimeExceedsDuration {
                player_id,
                seconds_played,
            } => write!(
                f,
                "player {player_id} played {seconds_played}s, longer than the match"
            ),
        }
    }
}

impl MatchRecord {
    /// Checks the structural invariants of a record.
    pub fn validate(&self) -> Result<(), RecordDefect> {
        if self.team_a.is_empty() {
            return Err(RecordDefect::EmptyTeam("team_a"));
        }
        if self.team_b.is_empty() {
            return Err(RecordDefect::EmptyTeam("team_b"));
        }
        let mut seen = BTreeSet::new();
        for p in self.participants() {
            if !seen.insert(p.player_id.as_str()) {
                return Err(RecordDefect::RepeatedPlayer(p.player_id.clone()));
            }
            if p.seconds_played > self.duration {
                return Err(RecordDefect::PlaytimeExceedsDuration {
                    player_id: p.player_id.clone(),
                    seconds_played: p.seconds_played,
                });
            }
        }
        Ok(())
    }

    pub fn participants(&self) -> impl Iterator<Item = &PlayerParticipation> {
        self.team_a.iter().chain(self.team_b.iter())
    }

    pub fn teams(&self) -> [&[PlayerParticipation]; 2] {
        [&self.team_a, &self.team_b]
    }

    /// Serializes the record as one line of the match-log format (no newline).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("match records always serialize")
    }
}

/// Why a line did not produce a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SkipReason {
    Malformed(String),
    Invalid(RecordDefect),
    /// The line's `match_id` was superseded by a later line.
    Duplicate(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedLine {
    /// 1-based line number in the input.
    pub line: usize,
    pub reason: SkipReason,
}

impl fmt::Display for SkippedLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            SkipReason::Malformed(msg) => write!(f, "line {}: malformed: {msg}", self.line),
            SkipReason::Invalid(defect) => write!(f, "line {}: invalid: {defect}", self.line),
            SkipReason::Duplicate(id) => write!(
                f,
                "line {}: duplicate match_id {id}, superseded by a later line",
                self.line
            ),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedLog {
    pub records: Vec<MatchRecord>,
    pub skipped: Vec<SkippedLine>,
}

impl ParsedLog {
    /// Plain-text skip report, one line per skipped input line.
    pub fn skip_report(&self) -> String {
        let mut out = format!(
            "records: {}\nskipped: {}\n",
            self.records.len(),
            self.skipped.len()
        );
        for s in &self.skipped {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }
}

/// Parses a line-delimited match log. Malformed or invalid lines are
/// recorded in the skip report; only I/O failures abort.
///
/// Blank lines are ignored. When a `match_id` repeats, the last occurrence
/// wins and keeps its own position in the output.
pub fn parse_match_log<R: BufRead>(reader: R) -> Result<ParsedLog, IngestError> {
    let mut parsed: Vec<(usize, MatchRecord)> = Vec::new();
    let mut skipped = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<MatchRecord>(&line) {
            Ok(record) => match record.validate() {
                Ok(()) => parsed.push((line_no, record)),
                Err(defect) => skipped.push(SkippedLine {
                    line: line_no,
                    reason: SkipReason::Invalid(defect),
                }),
            },
            Err(e) => skipped.push(SkippedLine {
                line: line_no,
                reason: SkipReason::Malformed(e.to_string()),
            }),
        }
    }

    let mut last_seen: HashMap<&str, usize> = HashMap::new();
    for (pos, (_, r)) in parsed.iter().enumerate() {
        last_seen.insert(r.match_id.as_str(), pos);
    }
    let keep: Vec<bool> = parsed
        .iter()
        .enumerate()
        .map(|(pos, (_, r))| last_seen[r.match_id.as_str()] == pos)
        .collect();
    let mut records = Vec::with_capacity(parsed.len());
    for ((line_no, record), keep) in parsed.into_iter().zip(keep) {
        if keep {
            records.push(record);
        } else {
            skipped.push(SkippedLine {
                line: line_no,
                reason: SkipReason::Duplicate(record.match_id),
            });
        }
    }
    skipped.sort_by_key(|s| s.line);
    Ok(ParsedLog { records, skipped })
}

/// Writes records in the match-log format, one per line.
pub fn write_match_log<W: std::io::Write>(
    mut writer: W,
    records: &[MatchRecord],
) -> std::io::Result<()> {
    for r in records {
        writeln!(writer, "{}", r.to_line())?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub records: Vec<MatchRecord>,
    pub retained: BTreeSet<String>,
    pub excluded: BTreeSet<String>,
}

/// Number of distinct week bins in which each player has at least one match.
pub fn active_week_counts(records: &[MatchRecord]) -> BTreeMap<String, usize> {
    let grid = TimeGrid::new(WEEK_SECONDS);
    let mut weeks: BTreeMap<&str, BTreeSet<i64>> = BTreeMap::new();
    for r in records {
        let bin = grid.bin_of(r.start_time);
        for p in r.participants() {
            weeks.entry(p.player_id.as_str()).or_default().insert(bin);
        }
    }
    weeks
        .into_iter()
        .map(|(id, w)| (id.to_string(), w.len()))
        .collect()
}

/// Keeps players active in at least `min_weeks` distinct week bins, drops the
/// other players' participations, and drops matches left with an empty team.
///
/// Dropping a match can push a retained player below the threshold, so the
/// pass repeats until every remaining player qualifies.
pub fn filter_short_lived_players(
    records: &[MatchRecord],
    min_weeks: usize,
) -> Result<FilterOutcome, IngestError> {
    if min_weeks < 1 {
        return Err(IngestError::InvalidMinWeeks);
    }
    let everyone: BTreeSet<String> = active_week_counts(records).into_keys().collect();
    let mut current = records.to_vec();
    loop {
        let short: BTreeSet<String> = active_week_counts(&current)
            .into_iter()
            .filter(|&(_, count)| count < min_weeks)
            .map(|(id, _)| id)
            .collect();
        if short.is_empty() {
            break;
        }
        let kept = |team: &[PlayerParticipation]| -> Vec<PlayerParticipation> {
            team.iter()
                .filter(|p| !short.contains(&p.player_id))
                .cloned()
                .collect()
        };
        current = current
            .iter()
            .filter_map(|r| {
                let team_a = kept(&r.team_a);
                let team_b = kept(&r.team_b);
                (!team_a.is_empty() && !team_b.is_empty()).then(|| MatchRecord {
                    team_a,
                    team_b,
                    ..r.clone()
                })
            })
            .collect();
    }
    let retained: BTreeSet<String> = active_week_counts(&current).into_keys().collect();
    let excluded = everyone.difference(&retained).cloned().collect();
    Ok(FilterOutcome {
        records: current,
        retained,
        excluded,
    })
}
