//! Synthetic match corpora with planted ground truth.
//!
//! Every player follows a weekly behavior target (matches, mean gap, mean
//! seconds played, completion rate) that is realized as concrete sessions on
//! a 30-minute slot grid. Sessions sharing a slot are grouped into teams and
//! paired into matches. Grouping never adds sessions to anyone's schedule,
//! so each player's realized participation vector is their own target up to
//! rounding.
//!
//! Planted roles:
//! - influencers keep one fixed behavior and play a fixed block of
//!   consecutive sessions at the same time every week;
//! - followers meet an influencer at a contact week, co-play inside the
//!   influencer's block for a few weeks, and converge toward the influencer's
//!   behavior at the mimic rate; they leave the game when the influencer does;
//! - hubs behave like background players but play one match per week with
//!   many random teammates;
//! - background players keep a noisy personal behavior and team up at random.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::ingest::{MatchRecord, PlayerParticipation};
use crate::time::{GRID_ORIGIN, MONTH_SECONDS, WEEK_SECONDS};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("infeasible synth config: {0}")]
    Infeasible(String),
    #[error("planted set is empty")]
    EmptyPlanted,
}

pub const SLOT_SECONDS: i64 = 1_800;
pub const SLOTS_PER_WEEK: usize = (WEEK_SECONDS / SLOT_SECONDS) as usize;
pub const MATCH_DURATION: u64 = 900;
/// 2014-09-15 00:00 UTC, aligned with the 28-day bin grid.
pub const DEFAULT_START: i64 = GRID_ORIGIN + 583 * MONTH_SECONDS;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub players: usize,
    pub weeks: usize,
    pub influencers: usize,
    pub followers_per_influencer: usize,
    pub hubs: usize,
    /// Fraction of the remaining gap to the influencer's behavior a follower
    /// closes each week after contact.
    pub mimic_rate: f64,
    /// Relative per-week noise on background behavior.
    pub noise: f64,
    /// Range of a background player's mean matches per week.
    pub min_weekly_matches: u32,
    pub max_weekly_matches: u32,
    /// Draw background weekly match counts from a Poisson around the mean
    /// instead of applying the relative noise.
    pub poisson_weekly_matches: bool,
    /// Influencer sessions per week; an attached follower shares up to this
    /// many of them.
    pub coplay_matches: u32,
    /// Weeks a follower co-plays with its influencer after contact.
    pub attachment_weeks: usize,
    /// Random teammates a hub collects in its weekly hub match.
    pub hub_partners: usize,
    /// Probability a free session looks for random teammates.
    pub teammate_rate: f64,
    pub max_team_size: usize,
    /// Probability a background player sits out a week inside their lifespan.
    pub skip_rate: f64,
    pub min_lifespan_weeks: usize,
    pub start_time: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            players: 1000,
            weeks: 20,
            influencers: 10,
            followers_per_influencer: 8,
            hubs: 10,
            mimic_rate: 0.5,
            noise: 0.05,
            min_weekly_matches: 2,
            max_weekly_matches: 6,
            poisson_weekly_matches: true,
            coplay_matches: 10,
            attachment_weeks: 4,
            hub_partners: 8,
            teammate_rate: 0.15,
            max_team_size: 3,
            skip_rate: 0.05,
            min_lifespan_weeks: 5,
            start_time: DEFAULT_START,
            seed: 42,
        }
    }
}

impl SynthConfig {
    /// Roughly 10k players, 26k co-play edges and 48 weekly snapshots.
    pub fn desk_scale(seed: u64) -> Self {
        SynthConfig {
            players: 10_000,
            weeks: 48,
            influencers: 100,
            followers_per_influencer: 8,
            hubs: 50,
            min_weekly_matches: 1,
            max_weekly_matches: 3,
            teammate_rate: 0.015,
            max_team_size: 2,
            hub_partners: 4,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::Infeasible(msg));
        let planted = self.influencers * (1 + self.followers_per_influencer) + self.hubs;
        if planted > self.players {
            return fail(format!(
                "{planted} planted players exceed the population of {}",
                self.players
            ));
        }
        if !(0.0..=1.0).contains(&self.mimic_rate) {
            return fail("mimic rate must lie in [0, 1]".into());
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return fail("noise must be >= 0".into());
        }
        if !(0.0..=1.0).contains(&self.teammate_rate) || !(0.0..1.0).contains(&self.skip_rate) {
            return fail("teammate and skip rates must be probabilities".into());
        }
        if self.min_lifespan_weeks < 1 || self.weeks < self.min_lifespan_weeks.max(6) {
            return fail(format!(
                "{} weeks cannot hold a {}-week lifespan plus a contact window",
                self.weeks, self.min_lifespan_weeks
            ));
        }
        if self.min_weekly_matches < 1 || self.min_weekly_matches > self.max_weekly_matches {
            return fail("weekly match range must satisfy 1 <= min <= max".into());
        }
        if self.max_weekly_matches > 20 || self.coplay_matches < 1 || self.coplay_matches > 20 {
            return fail("at most 20 sessions per week are supported".into());
        }
        if self.max_team_size < 2 {
            return fail("max team size must be at least 2".into());
        }
        if self.attachment_weeks < 1 {
            return fail("attachment must last at least one week".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Influencer,
    Follower,
    Hub,
    Background,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Influencer => "influencer",
            Role::Follower => "follower",
            Role::Hub => "hub",
            Role::Background => "background",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroundTruth {
    pub roles: BTreeMap<String, Role>,
    /// Follower id to the influencer it mimics.
    pub leaders: BTreeMap<String, String>,
}

impl GroundTruth {
    pub fn with_role(&self, role: Role) -> BTreeSet<String> {
        self.roles
            .iter()
            .filter(|(_, &r)| r == role)
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Sidecar CSV: `player_id,role`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("player_id,role\n");
        for (id, role) in &self.roles {
            out.push_str(&format!("{id},{role}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub records: Vec<MatchRecord>,
    pub truth: GroundTruth,
    /// Sessions that found no opponent in their slot and were not played.
    pub dropped_sessions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Recovery {
    pub precision: f64,
    pub recall: f64,
}

/// Precision and recall of `detected` against `planted`. An empty detection
/// has precision 0.
pub fn evaluate_recovery(
    detected: &BTreeSet<String>,
    planted: &BTreeSet<String>,
) -> Result<Recovery, SynthError> {
    if planted.is_empty() {
        return Err(SynthError::EmptyPlanted);
    }
    let hits = detected.intersection(planted).count() as f64;
    Ok(Recovery {
        precision: if detected.is_empty() {
            0.0
        } else {
            hits / detected.len() as f64
        },
        recall: hits / planted.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Behavior {
    matches: f64,
    gap: f64,
    seconds: f64,
    completion: f64,
}

impl Behavior {
    fn lerp(self, to: Behavior, alpha: f64) -> Behavior {
        let mix = |a: f64, b: f64| a + alpha * (b - a);
        Behavior {
            matches: mix(self.matches, to.matches),
            gap: mix(self.gap, to.gap),
            seconds: mix(self.seconds, to.seconds),
            completion: mix(self.completion, to.completion),
        }
    }
}

#[derive(Debug, Clone)]
struct Agent {
    id: String,
    role: Role,
    first_week: usize,
    last_week: usize,
    base: Behavior,
    leader: Option<usize>,
    contact: usize,
    skips: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SessionKind {
    Free,
    /// The influencer's own block session.
    Lead,
    /// A follower's session inside its influencer's block.
    Attached(usize),
    HubMatch,
}

#[derive(Debug, Clone, Copy)]
struct Session {
    agent: usize,
    seconds: u64,
    completed: bool,
    kind: SessionKind,
}

struct Generator<'a> {
    config: &'a SynthConfig,
    rng: ChaCha8Rng,
    agents: Vec<Agent>,
    block_offset: usize,
    records: Vec<MatchRecord>,
    dropped: usize,
}

const INFLUENCER_GAP: f64 = SLOT_SECONDS as f64;
const INFLUENCER_SECONDS: f64 = 850.0;
const FOLLOWER_GAP: (f64, f64) = (50_000.0, 55_000.0);
const FOLLOWER_SECONDS: (f64, f64) = (200.0, 300.0);
const FOLLOWER_MATCHES: f64 = 4.0;
const BACKGROUND_GAP: (f64, f64) = (3_600.0, 60_000.0);
const BACKGROUND_SECONDS: (f64, f64) = (300.0, 800.0);
const BACKGROUND_COMPLETION: (f64, f64) = (0.3, 0.9);
const MAX_SPAN_SLOTS: usize = SLOTS_PER_WEEK - 48;

/// Generates a corpus and its ground truth. Output depends only on `config`.
pub fn generate(config: &SynthConfig) -> Result<SynthCorpus, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let agents = plant_agents(config, &mut rng);
    let block_offset = rng.random_range(0..24);
    let mut generator = Generator {
        config,
        rng,
        agents,
        block_offset,
        records: Vec::new(),
        dropped: 0,
    };
    for week in 0..config.weeks {
        generator.play_week(week);
    }
    let mut truth = GroundTruth::default();
    for a in &generator.agents {
        truth.roles.insert(a.id.clone(), a.role);
        if let Some(l) = a.leader {
            truth
                .leaders
                .insert(a.id.clone(), generator.agents[l].id.clone());
        }
    }
    Ok(SynthCorpus {
        records: generator.records,
        truth,
        dropped_sessions: generator.dropped,
    })
}

fn plant_agents(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<Agent> {
    let n = config.players;
    let weeks = config.weeks;
    let width = (n.max(2) - 1).to_string().len();
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);

    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| rng.random_range(lo..=hi);
    let background_behavior = |rng: &mut ChaCha8Rng| {
        let matches =
            rng.random_range(config.min_weekly_matches..=config.max_weekly_matches) as f64;
        let max_gap = if matches > 1.0 {
            (MAX_SPAN_SLOTS as f64 * SLOT_SECONDS as f64 / (matches - 1.0)).min(BACKGROUND_GAP.1)
        } else {
            BACKGROUND_GAP.1
        };
        Behavior {
            matches,
            gap: rng.random_range(BACKGROUND_GAP.0..=max_gap.max(BACKGROUND_GAP.0)),
            seconds: uniform(rng, BACKGROUND_SECONDS),
            completion: uniform(rng, BACKGROUND_COMPLETION),
        }
    };
    let long_span = |rng: &mut ChaCha8Rng| {
        let quarter = weeks / 4;
        let first = rng.random_range(0..=quarter);
        let last = rng.random_range(weeks - 1 - quarter..weeks);
        (first, last)
    };
    let random_span = |rng: &mut ChaCha8Rng| {
        let len = rng.random_range(config.min_lifespan_weeks..=weeks);
        let first = rng.random_range(0..=weeks - len);
        (first, first + len - 1)
    };

    let mut agents = Vec::with_capacity(n);
    let push = |agents: &mut Vec<Agent>, role, span: (usize, usize), base, leader, contact| {
        let id = format!("p{:0width$}", labels[agents.len()]);
        agents.push(Agent {
            id,
            role,
            first_week: span.0,
            last_week: span.1,
            base,
            leader,
            contact,
            skips: vec![false; weeks],
        });
    };

    for _ in 0..config.influencers {
        let span = long_span(rng);
        let base = Behavior {
            matches: config.coplay_matches as f64,
            gap: INFLUENCER_GAP,
            seconds: INFLUENCER_SECONDS,
            completion: 1.0,
        };
        let leader_idx = agents.len();
        push(&mut agents, Role::Influencer, span, base, None, 0);
        let (lead_first, lead_last) = span;
        let window_end = lead_last.saturating_sub(3).max(lead_first + 1);
        let slots = window_end - lead_first;
        for k in 0..config.followers_per_influencer {
            let contact = lead_first
                + 1
                + (k * slots) / config.followers_per_influencer.max(1)
                + rng
                    .random_range(0..=1usize)
                    .min(window_end - lead_first - 1);
            let contact = contact.min(window_end);
            let first = rng.random_range(contact.saturating_sub(3)..contact);
            let base = Behavior {
                matches: FOLLOWER_MATCHES,
                gap: uniform(rng, FOLLOWER_GAP),
                seconds: uniform(rng, FOLLOWER_SECONDS),
                completion: 0.0,
            };
            push(
                &mut agents,
                Role::Follower,
                (first, lead_last),
                base,
                Some(leader_idx),
                contact,
            );
        }
    }
    for _ in 0..config.hubs {
        let span = long_span(rng);
        let base = background_behavior(rng);
        push(&mut agents, Role::Hub, span, base, None, 0);
    }
    while agents.len() < n {
        let span = random_span(rng);
        let base = background_behavior(rng);
        push(&mut agents, Role::Background, span, base, None, 0);
        let last = agents.last_mut().expect("just pushed");
        for w in last.first_week..=last.last_week {
            last.skips[w] = rng.random_bool(config.skip_rate);
        }
    }
    agents
}

impl Generator<'_> {
    fn weekly_matches(&mut self, mean: f64) -> f64 {
        let draw: f64 = Poisson::new(mean)
            .expect("positive mean")
            .sample(&mut self.rng);
        draw.max(1.0)
    }

    fn noisy(&mut self, b: Behavior) -> Behavior {
        let sigma = self.config.noise;
        let mut jitter = |x: f64| {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            (x * (1.0 + sigma * z)).max(0.0)
        };
        Behavior {
            matches: jitter(b.matches),
            gap: jitter(b.gap),
            seconds: jitter(b.seconds),
            completion: jitter(b.completion).min(1.0),
        }
    }

    fn attached_to(&self, agent: &Agent, week: usize) -> Option<usize> {
        let leader = agent.leader?;
        let until =
            (agent.contact + self.config.attachment_weeks).min(self.agents[leader].last_week + 1);
        (week >= agent.contact && week < until).then_some(leader)
    }

    fn target(&mut self, idx: usize, week: usize) -> Behavior {
        let agent = &self.agents[idx];
        match (agent.role, agent.leader) {
            (Role::Influencer, _) => agent.base,
            (Role::Follower, Some(leader)) if week >= agent.contact => {
                let steps = (week - agent.contact) as i32;
                let alpha = 1.0 - (1.0 - self.config.mimic_rate).powi(steps);
                agent.base.lerp(self.agents[leader].base, alpha)
            }
            (Role::Follower, _) => {
                let base = agent.base;
                self.noisy(base)
            }
            _ => {
                let base = agent.base;
                let noisy = self.noisy(base);
                if self.config.poisson_weekly_matches {
                    Behavior {
                        matches: self.weekly_matches(base.matches),
                        ..noisy
                    }
                } else {
                    noisy
                }
            }
        }
    }

    /// Session slots and kinds for one agent in one week.
    fn place(&mut self, idx: usize, week: usize, b: Behavior) -> Vec<(usize, SessionKind)> {
        let m = (b.matches.round() as usize).clamp(1, 20);
        let wanted = ((m - 1) as f64 * b.gap / SLOT_SECONDS as f64).round() as usize;
        let span = wanted.max(m - 1).min(MAX_SPAN_SLOTS);
        let agent = &self.agents[idx];
        let role = agent.role;
        let attached = self.attached_to(agent, week);

        let (offset, prefix, prefix_kind) = if role == Role::Influencer {
            (self.block_offset, m, SessionKind::Lead)
        } else if let Some(leader) = attached {
            let cap = self.config.coplay_matches as usize;
            let shared = if span == m - 1 { m } else { m - 1 };
            (
                self.block_offset,
                shared.min(cap).max(1),
                SessionKind::Attached(leader),
            )
        } else {
            let offset = self.rng.random_range(0..SLOTS_PER_WEEK - span);
            (offset, 1, SessionKind::Free)
        };
        let prefix = prefix.min(m);
        let mut slots: Vec<(usize, SessionKind)> =
            (0..prefix).map(|k| (offset + k, prefix_kind)).collect();
        let rest = m - prefix;
        if rest > 0 {
            let start = prefix - 1;
            let room = span.max(m - 1) - start;
            for k in 0..rest {
                let pos = start + ((k + 1) * room + rest / 2) / rest;
                slots.push((offset + pos.min(start + room), SessionKind::Free));
            }
        }
        slots.dedup_by_key(|s| s.0);
        slots
    }

    fn play_week(&mut self, week: usize) {
        let mut by_slot: BTreeMap<usize, Vec<Session>> = BTreeMap::new();
        for idx in 0..self.agents.len() {
            let a = &self.agents[idx];
            if week < a.first_week || week > a.last_week || a.skips[week] {
                continue;
            }
            let b = self.target(idx, week);
            let slots = self.place(idx, week, b);
            let seconds = b.seconds.round().clamp(1.0, MATCH_DURATION as f64) as u64;
            let done = ((b.completion * slots.len() as f64).round() as usize).min(slots.len());
            let mut completed: Vec<bool> = (0..slots.len()).map(|k| k < done).collect();
            completed.shuffle(&mut self.rng);
            for ((slot, kind), completed) in slots.into_iter().zip(completed) {
                by_slot.entry(slot).or_default().push(Session {
                    agent: idx,
                    seconds,
                    completed,
                    kind,
                });
            }
        }
        self.mark_hub_matches(&mut by_slot);
        rehome_lone_sessions(&mut by_slot);
        let week_start = self.config.start_time + week as i64 * WEEK_SECONDS;
        for (slot, sessions) in by_slot {
            let start = week_start + slot as i64 * SLOT_SECONDS;
            let teams = self.form_teams(sessions);
            self.emit_matches(start, teams);
        }
    }

    /// Each hub plays its hub match in the slot, among its own, holding the
    /// most free sessions.
    fn mark_hub_matches(&self, by_slot: &mut BTreeMap<usize, Vec<Session>>) {
        let mut best: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for (&slot, sessions) in by_slot.iter() {
            let free = sessions
                .iter()
                .filter(|s| s.kind == SessionKind::Free)
                .count();
            for s in sessions {
                if self.agents[s.agent].role == Role::Hub {
                    let entry = best.entry(s.agent).or_insert((slot, free));
                    if free > entry.1 {
                        *entry = (slot, free);
                    }
                }
            }
        }
        for (agent, (slot, _)) in best {
            let sessions = by_slot.get_mut(&slot).expect("slot seen above");
            let s = sessions
                .iter_mut()
                .find(|s| s.agent == agent)
                .expect("hub in slot");
            s.kind = SessionKind::HubMatch;
        }
    }

    fn form_teams(&mut self, sessions: Vec<Session>) -> Vec<Team> {
        let mut leads: BTreeMap<usize, Vec<Session>> = BTreeMap::new();
        let mut hubs = Vec::new();
        let mut free = Vec::new();
        let mut orphans = Vec::new();
        for s in sessions {
            match s.kind {
                SessionKind::Lead => leads.entry(s.agent).or_default().insert(0, s),
                SessionKind::Attached(leader) => orphans.push((leader, s)),
                SessionKind::HubMatch => hubs.push(s),
                SessionKind::Free => free.push(s),
            }
        }
        for (leader, s) in orphans {
            match leads.get_mut(&leader) {
                Some(team) => team.push(s),
                // the influencer sat this slot out
                None => free.push(Session {
                    kind: SessionKind::Free,
                    ..s
                }),
            }
        }
        free.shuffle(&mut self.rng);
        let mut teams: Vec<Team> = leads
            .into_values()
            .map(|members| Team {
                members,
                protected: true,
            })
            .collect();
        for hub in hubs {
            let take = self.config.hub_partners.min(free.len());
            let mut members = vec![hub];
            members.extend(free.drain(..take));
            teams.push(Team {
                members,
                protected: false,
            });
        }
        let mut rest = free.into_iter().peekable();
        while let Some(first) = rest.next() {
            let mut members = vec![first];
            if self.rng.random_bool(self.config.teammate_rate) {
                let size = self.rng.random_range(2..=self.config.max_team_size);
                while members.len() < size {
                    match rest.next() {
                        Some(s) => members.push(s),
                        None => break,
                    }
                }
            }
            teams.push(Team {
                members,
                protected: false,
            });
        }
        teams
    }

    fn emit_matches(&mut self, start: i64, mut teams: Vec<Team>) {
        if teams.len() % 2 == 1 {
            self.dropped += balance_team_count(&mut teams);
        }
        // protected teams lead so they are spread across matches
        let (mut protected, mut open): (Vec<Team>, Vec<Team>) =
            teams.into_iter().partition(|t| t.protected);
        protected.shuffle(&mut self.rng);
        open.shuffle(&mut self.rng);
        protected.append(&mut open);
        let mut teams = protected.into_iter();
        while let (Some(a), Some(b)) = (teams.next(), teams.next()) {
            let id = format!("m{:08}", self.records.len());
            let roster = |t: Team| -> Vec<PlayerParticipation> {
                t.members
                    .iter()
                    .map(|s| PlayerParticipation {
                        player_id: self.agents[s.agent].id.clone(),
                        seconds_played: s.seconds,
                        completed: s.completed,
                    })
                    .collect()
            };
            let record = MatchRecord {
                match_id: id,
                start_time: start,
                duration: MATCH_DURATION,
                team_a: roster(a),
                team_b: roster(b),
            };
            self.records.push(record);
        }
    }
}

/// Slots a lone session may move to find opponents.
const REHOME_RADIUS: usize = 4;

/// Moves each session that is alone in its slot to the nearest occupied slot
/// within [`REHOME_RADIUS`] where its player is not already playing.
fn rehome_lone_sessions(by_slot: &mut BTreeMap<usize, Vec<Session>>) {
    let lone: Vec<usize> = by_slot
        .iter()
        .filter(|(_, s)| s.len() == 1)
        .map(|(&k, _)| k)
        .collect();
    for slot in lone {
        let Some(session) = by_slot.get(&slot).filter(|s| s.len() == 1).map(|s| s[0]) else {
            continue;
        };
        let target = (1..=REHOME_RADIUS)
            .flat_map(|d| [slot.checked_sub(d), Some(slot + d)])
            .flatten()
            .find(|k| {
                by_slot
                    .get(k)
                    .is_some_and(|s| !s.is_empty() && s.iter().all(|o| o.agent != session.agent))
            });
        if let Some(k) = target {
            by_slot.remove(&slot);
            by_slot.get_mut(&k).expect("occupied").push(session);
        }
    }
}

#[derive(Debug, Clone)]
struct Team {
    members: Vec<Session>,
    protected: bool,
}

/// Makes the team count even without dropping sessions when possible:
/// split an open team, else merge two open singletons, else split a
/// protected team. Only a lone singleton is dropped.
fn balance_team_count(teams: &mut Vec<Team>) -> usize {
    if let Some(pos) = teams
        .iter()
        .rposition(|t| !t.protected && t.members.len() >= 2)
    {
        let tail = teams[pos].members.split_off(1);
        teams.push(Team {
            members: tail,
            protected: false,
        });
        return 0;
    }
    let singles: Vec<usize> = teams
        .iter()
        .enumerate()
        .filter(|(_, t)| !t.protected)
        .map(|(i, _)| i)
        .collect();
    if singles.len() >= 2 {
        let moved = teams.remove(singles[singles.len() - 1]);
        teams[singles[0]].members.extend(moved.members);
        return 0;
    }
    if let Some(pos) = teams.iter().rposition(|t| t.members.len() >= 2) {
        let tail = teams[pos].members.split_off(1);
        teams.push(Team {
            members: tail,
            protected: false,
        });
        return 0;
    }
    match singles.last() {
        Some(&last) => teams.remove(last),
        None => teams.pop().expect("odd count is nonzero"),
    };
    1
}
