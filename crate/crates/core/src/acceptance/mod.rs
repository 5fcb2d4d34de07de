//! End-to-end acceptance experiments with pass/fail verdicts.
//!
//! Each criterion runs a desk-scale version of one of the reference
//! measurements, compares it with an independently computed expectation and
//! reports the measured figure next to its target.

mod criteria;
pub mod oracle;

use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};

type Runner = fn(u64) -> Result<criteria::Verdict>;

pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    /// Wall-clock allowance on a desktop machine.
    pub budget: Duration,
    run: Runner,
}

const fn criterion(id: u8, title: &'static str, secs: u64, run: Runner) -> Criterion {
    Criterion {
        id,
        title,
        budget: Duration::from_secs(secs),
        run,
    }
}

pub const CRITERIA: [Criterion; 12] = [
    criterion(1, "combined demodulation matches mix-filter-decimate", 5, criteria::combined_demod),
    criterion(2, "frequency linearity", 60, criteria::linearity),
    criterion(3, "out-of-band suppression", 10, criteria::out_of_band),
    criterion(4, "noise floor scales as 1/A²", 60, criteria::amplitude_scaling),
    criterion(5, "white-phase ADEV slope", 60, criteria::adev_slope),
    criterion(6, "two-board synchronization jitter", 120, criteria::sync_jitter),
    criterion(7, "resynchronization schedule", 5, criteria::resync_schedule),
    criterion(8, "self-heterodyne residual spectrum", 120, criteria::self_heterodyne_residual),
    criterion(9, "heterodyne fiber/laser separation", 120, criteria::heterodyne_separation),
    criterion(10, "unwrap exactness", 5, criteria::unwrap_exactness),
    criterion(11, "wire round trip and CRC coverage", 30, criteria::wire_integrity),
    criterion(12, "real-time throughput", 30, criteria::throughput),
];

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub measured: String,
    pub target: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let over = if self.elapsed > self.budget { " over budget" } else { "" };
        write!(
            f,
            "[{}] {:>2} {}: {} (target {}) in {:.1} s{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.measured,
            self.target,
            self.elapsed.as_secs_f64(),
            over
        )
    }
}

impl Criterion {
    /// Run with the given seed. A verdict is a pass only if the numbers
    /// meet the target within the time budget.
    pub fn run(&self, seed: u64) -> Outcome {
        let t0 = Instant::now();
        let result = (self.run)(seed);
        let elapsed = t0.elapsed();
        let (passed, measured, target) = match result {
            Ok(v) => (v.passed && elapsed <= self.budget, v.measured, v.target),
            Err(e) => (false, format!("error: {e}"), String::new()),
        };
        Outcome {
            id: self.id,
            title: self.title,
            passed,
            measured,
            target,
            elapsed,
            budget: self.budget,
        }
    }
}

pub fn find(id: u8) -> Result<&'static Criterion> {
    CRITERIA
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::Usage(format!("no acceptance criterion {id}")))
}

/// Run every criterion in order, calling `report` as each finishes.
pub fn run_all(seed: u64, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .map(|c| {
            let o = c.run(seed);
            report(&o);
            o
        })
        .collect()
}
