//! Shared fixtures for the benchmarks.

use playnet_core::{generate, MatchRecord, SynthConfig};

/// A synthetic corpus of `players` players over `weeks` weeks, seed 42.
pub fn corpus(players: usize, weeks: usize) -> Vec<MatchRecord> {
    let config = SynthConfig {
        players,
        weeks,
        influencers: players / 100,
        hubs: players / 100,
        ..SynthConfig::default()
    };
    generate(&config).expect("valid bench config").records
}
