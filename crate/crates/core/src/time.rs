//! Fixed-width time bins shared by the activity filter and snapshot builder.
//!
//! Bins are aligned to Monday 1970-01-05 00:00 UTC. Every width used here
//! (1, 7 and 28 days) divides evenly into the coarser ones, so a week bin
//! never straddles two month bins and the filter's week bins coincide with
//! weekly snapshots.

pub const DAY_SECONDS: i64 = 86_400;
pub const WEEK_SECONDS: i64 = 7 * DAY_SECONDS;
pub const MONTH_SECONDS: i64 = 4 * WEEK_SECONDS;

/// Unix timestamp of the first Monday after the epoch.
pub const GRID_ORIGIN: i64 = 4 * DAY_SECONDS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    width: i64,
}

impl TimeGrid {
    pub fn new(width: i64) -> Self {
        assert!(width > 0, "bin width must be positive");
        TimeGrid { width }
    }

    pub fn width(&self) -> i64 {
        self.width
    }

    /// Absolute bin index of a timestamp.
    pub fn bin_of(&self, t: i64) -> i64 {
        (t - GRID_ORIGIN).div_euclid(self.width)
    }

    /// Start timestamp of an absolute bin.
    pub fn bin_start(&self, bin: i64) -> i64 {
        GRID_ORIGIN + bin * self.width
    }
}
