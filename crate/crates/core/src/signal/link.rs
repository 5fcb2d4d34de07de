//! Two-laser fiber link seen at the two photodiodes.
//!
//! Everything is a frequency-fluctuation series. Propagation delays are
//! integer sample shifts at the simulation rate. The fiber is split into a
//! common process `η` and a differential residual `δ`, with
//! `η12 = η + δ/2` and `η21 = η − δ/2`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::noise::{white_level_from_stability, NoiseSpec, NoiseStream};
use crate::error::{param, Result};
use crate::rng;

/// Optical carrier at 1542 nm, Hz.
pub const OPTICAL_CARRIER: f64 = 194.5e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Both photodiodes beat a laser against its own round-trip copy.
    #[default]
    SelfHeterodyne,
    /// Each photodiode beats the local laser against the remote one.
    Heterodyne,
}

impl std::str::FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self-heterodyne" => Ok(Scheme::SelfHeterodyne),
            "heterodyne" => Ok(Scheme::Heterodyne),
            other => param(format!("unknown scheme {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkScenario {
    pub laser1: NoiseSpec,
    pub laser2: NoiseSpec,
    pub fiber_common: NoiseSpec,
    pub fiber_differential: NoiseSpec,
    /// One-way propagation delay, s.
    pub tau: f64,
    /// Fiber length, m.
    pub length: f64,
    pub scheme: Scheme,
    pub optical_carrier: f64,
}

/// Default laser white-frequency level: 2e-15 at 1 s on the optical carrier.
pub fn default_laser_level() -> f64 {
    white_level_from_stability(2e-15, OPTICAL_CARRIER)
}

/// Default one-way fiber white-frequency level, Hz²/Hz.
pub const DEFAULT_FIBER_LEVEL: f64 = 0.1;
/// Default differential residual level, Hz²/Hz.
pub const DEFAULT_FIBER_DIFF_LEVEL: f64 = 1e-3;

impl Default for LinkScenario {
    fn default() -> Self {
        let laser = default_laser_level();
        LinkScenario {
            laser1: NoiseSpec {
                white_freq_level: laser,
                linear_drift: 0.5,
                ..Default::default()
            },
            laser2: NoiseSpec::white_frequency(laser, 0),
            fiber_common: NoiseSpec::white_frequency(DEFAULT_FIBER_LEVEL, 0),
            fiber_differential: NoiseSpec::white_frequency(DEFAULT_FIBER_DIFF_LEVEL, 0),
            tau: 180e-6,
            length: 36e3,
            scheme: Scheme::SelfHeterodyne,
            optical_carrier: OPTICAL_CARRIER,
        }
        .reseeded(0)
    }
}

impl LinkScenario {
    /// Silent scenario with the default geometry.
    pub fn quiet(scheme: Scheme) -> Self {
        LinkScenario {
            laser1: NoiseSpec::default(),
            laser2: NoiseSpec::default(),
            fiber_common: NoiseSpec::default(),
            fiber_differential: NoiseSpec::default(),
            scheme,
            ..Default::default()
        }
    }

    /// Copy with each process seeded independently from `seed`.
    ///
    /// Seeds are kept below 2^63 so that scenarios survive a TOML round trip.
    pub fn reseeded(&self, seed: u64) -> Self {
        let mut s = *self;
        let sub = |k| rng::mix(seed, k) >> 1;
        s.laser1.seed = sub(1);
        s.laser2.seed = sub(2);
        s.fiber_common.seed = sub(3);
        s.fiber_differential.seed = sub(4);
        s
    }

    pub fn validate(&self) -> Result<()> {
        for spec in [&self.laser1, &self.laser2, &self.fiber_common, &self.fiber_differential] {
            spec.validate()?;
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return param(format!("tau must be non-negative, got {}", self.tau));
        }
        Ok(())
    }

    /// One-way delay in samples at `rate`; the delay must be an integer count.
    pub fn delay_samples(&self, rate: f64) -> Result<usize> {
        if !(rate > 0.0 && rate.is_finite()) {
            return param(format!("rate must be positive, got {rate}"));
        }
        let d = self.tau * rate;
        let r = d.round();
        if (d - r).abs() > 1e-6 {
            return param(format!(
                "tau = {} s is {d} samples at {rate} Hz; choose a rate giving an integer delay",
                self.tau
            ));
        }
        Ok(r as usize)
    }
}

/// Noise processes at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Processes {
    pub rho1: f64,
    pub rho2: f64,
    pub eta: f64,
    pub delta: f64,
    /// Actuation applied by the drift AOM, Hz.
    pub drift: f64,
}

impl Processes {
    pub fn eta12(&self) -> f64 {
        self.eta + 0.5 * self.delta
    }

    pub fn eta21(&self) -> f64 {
        self.eta - 0.5 * self.delta
    }
}

/// Photodiode frequencies from the processes now, one delay ago and two
/// delays ago.
pub fn photodiodes(scheme: Scheme, now: &Processes, one: &Processes, two: &Processes) -> (f64, f64) {
    match scheme {
        Scheme::SelfHeterodyne => (
            two.rho1 - now.rho1 + one.eta12() + now.eta21(),
            two.rho2 - now.rho2 + one.eta21() + now.eta12(),
        ),
        Scheme::Heterodyne => (
            one.rho2 - now.rho1 + one.drift + now.eta21(),
            one.rho1 - now.rho2 - now.drift + now.eta12(),
        ),
    }
}

/// One instant of link output together with the truth processes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkSample {
    pub pd1: f64,
    pub pd2: f64,
    pub truth: Processes,
}

/// Streaming link simulator.
///
/// Processes are pre-rolled by two delays so the first output already has
/// a full delay history.
#[derive(Debug, Clone)]
pub struct LinkStream {
    scheme: Scheme,
    delay: usize,
    rate: f64,
    rho1: NoiseStream,
    rho2: NoiseStream,
    eta: NoiseStream,
    delta: NoiseStream,
    history: VecDeque<Processes>,
}

impl LinkStream {
    pub fn new(scenario: &LinkScenario, rate: f64) -> Result<Self> {
        scenario.validate()?;
        let delay = scenario.delay_samples(rate)?;
        let mut s = LinkStream {
            scheme: scenario.scheme,
            delay,
            rate,
            rho1: NoiseStream::new(&scenario.laser1, rate),
            rho2: NoiseStream::new(&scenario.laser2, rate),
            eta: NoiseStream::new(&scenario.fiber_common, rate),
            delta: NoiseStream::new(&scenario.fiber_differential, rate),
            history: VecDeque::with_capacity(2 * delay + 1),
        };
        for _ in 0..2 * delay {
            let p = s.draw(0.0);
            s.history.push_back(p);
        }
        Ok(s)
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn draw(&mut self, drift: f64) -> Processes {
        Processes {
            rho1: self.rho1.next_sample(),
            rho2: self.rho2.next_sample(),
            eta: self.eta.next_sample(),
            delta: self.delta.next_sample(),
            drift,
        }
    }

    /// Advance one sample with the drift actuation currently applied.
    pub fn step(&mut self, drift: f64) -> LinkSample {
        let now = self.draw(drift);
        self.history.push_back(now);
        let d = self.delay;
        let len = self.history.len();
        let (pd1, pd2) = photodiodes(self.scheme, &now, &self.history[len - 1 - d], &self.history[len - 1 - 2 * d]);
        self.history.pop_front();
        LinkSample { pd1, pd2, truth: now }
    }
}

/// Full link record at one rate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkSeries {
    pub pd1: Vec<f64>,
    pub pd2: Vec<f64>,
    pub truth: Vec<Processes>,
    pub rate: f64,
    pub delay: usize,
}

impl LinkSeries {
    pub fn eta(&self) -> Vec<f64> {
        self.truth.iter().map(|p| p.eta).collect()
    }

    pub fn rho1(&self) -> Vec<f64> {
        self.truth.iter().map(|p| p.rho1).collect()
    }

    pub fn rho2(&self) -> Vec<f64> {
        self.truth.iter().map(|p| p.rho2).collect()
    }
}

/// Simulate both photodiode outputs with no drift actuation.
pub fn simulate_link(scenario: &LinkScenario, duration: f64, rate: f64) -> Result<LinkSeries> {
    let mut stream = LinkStream::new(scenario, rate)?;
    let n = (duration * rate).round() as usize;
    if n < 2 || n < 2 * stream.delay() {
        return param(format!(
            "{n} samples do not cover two delays of {} samples",
            stream.delay()
        ));
    }
    let mut out = LinkSeries {
        pd1: Vec::with_capacity(n),
        pd2: Vec::with_capacity(n),
        truth: Vec::with_capacity(n),
        rate,
        delay: stream.delay(),
    };
    for _ in 0..n {
        let s = stream.step(0.0);
        out.pd1.push(s.pd1);
        out.pd2.push(s.pd2);
        out.truth.push(s.truth);
    }
    Ok(out)
}

/// Photodiode series from explicit process arrays. Output `k` uses process
/// index `k + 2·delay`, so the result is `2·delay` shorter than the input.
pub fn link_from_processes(scheme: Scheme, delay: usize, processes: &[Processes]) -> (Vec<f64>, Vec<f64>) {
    let start = 2 * delay;
    processes
        .iter()
        .enumerate()
        .skip(start)
        .map(|(i, now)| photodiodes(scheme, now, &processes[i - delay], &processes[i - start]))
        .unzip()
}
