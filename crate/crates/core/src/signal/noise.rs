//! Power-law frequency-noise synthesis.
//!
//! Each archetype is generated in the time domain from its own Gaussian
//! stream: white phase noise is drawn as phase and differenced, white
//! frequency noise is drawn directly, random-walk frequency noise is the
//! running sum of white increments, and linear drift is added analytically.
//! Levels are one-sided PSDs.
//!
//! Gaussian streams are reseeded at fixed block boundaries from
//! `(seed, component, block)`, so any index range can be regenerated
//! independently and the output never depends on how the caller chunks it.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng;

/// Samples per independently seeded block.
const BLOCK: u64 = 1 << 16;

/// One-sided PSD levels of the frequency-noise archetypes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    /// White phase noise, rad²/Hz.
    pub white_phase_level: f64,
    /// White frequency noise, Hz²/Hz.
    pub white_freq_level: f64,
    /// Random-walk frequency noise `h/f²`, Hz²·Hz.
    pub random_walk_freq_level: f64,
    /// Linear frequency drift, Hz/s.
    pub linear_drift: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn is_silent(&self) -> bool {
        self.white_phase_level == 0.0
            && self.white_freq_level == 0.0
            && self.random_walk_freq_level == 0.0
            && self.linear_drift == 0.0
    }

    pub fn white_frequency(level: f64, seed: u64) -> Self {
        NoiseSpec {
            white_freq_level: level,
            seed,
            ..Default::default()
        }
    }

    pub fn white_phase(level: f64, seed: u64) -> Self {
        NoiseSpec {
            white_phase_level: level,
            seed,
            ..Default::default()
        }
    }

    /// Scale all stochastic PSD levels by `db` decibels (drift unchanged).
    pub fn scaled_db(&self, db: f64) -> Self {
        let k = 10f64.powf(db / 10.0);
        NoiseSpec {
            white_phase_level: self.white_phase_level * k,
            white_freq_level: self.white_freq_level * k,
            random_walk_freq_level: self.random_walk_freq_level * k,
            ..*self
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let levels = [
            self.white_phase_level,
            self.white_freq_level,
            self.random_walk_freq_level,
        ];
        if levels.iter().any(|l| !(l.is_finite() && *l >= 0.0)) || !self.linear_drift.is_finite() {
            return crate::error::param(format!("noise levels must be finite and non-negative: {self:?}"));
        }
        Ok(())
    }
}

/// Block-reseeded Gaussian source for one noise component.
#[derive(Debug, Clone)]
struct BlockGaussian {
    seed: u64,
    component: u64,
    index: u64,
    rng: Option<ChaCha8Rng>,
}

impl BlockGaussian {
    fn new(seed: u64, component: u64, start: u64) -> Self {
        BlockGaussian {
            seed,
            component,
            index: start,
            rng: None,
        }
    }

    #[inline]
    fn next(&mut self) -> f64 {
        let block = self.index / BLOCK;
        let offset = self.index % BLOCK;
        if offset == 0 || self.rng.is_none() {
            let mut r = rng::derived(self.seed, (self.component << 40) ^ block);
            for _ in 0..offset {
                let _: f64 = r.sample(StandardNormal);
            }
            self.rng = Some(r);
        }
        self.index += 1;
        self.rng.as_mut().expect("seeded above").sample(StandardNormal)
    }
}

/// Streaming generator of a frequency-fluctuation series, Hz.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    spec: NoiseSpec,
    rate: f64,
    index: u64,
    sigma_phase: f64,
    sigma_freq: f64,
    sigma_walk: f64,
    phase: Option<BlockGaussian>,
    freq: Option<BlockGaussian>,
    walk: Option<BlockGaussian>,
    phase_now: f64,
    walk_state: f64,
}

impl NoiseStream {
    pub fn new(spec: &NoiseSpec, rate: f64) -> Self {
        let sigma_phase = (spec.white_phase_level * rate / 2.0).sqrt();
        let sigma_freq = (spec.white_freq_level * rate / 2.0).sqrt();
        let sigma_walk = PI * (2.0 * spec.random_walk_freq_level / rate).sqrt();
        let mut phase = (sigma_phase > 0.0).then(|| BlockGaussian::new(spec.seed, 1, 0));
        let phase_now = phase.as_mut().map_or(0.0, |g| g.next() * sigma_phase);
        NoiseStream {
            spec: *spec,
            rate,
            index: 0,
            sigma_phase,
            sigma_freq,
            sigma_walk,
            phase,
            freq: (sigma_freq > 0.0).then(|| BlockGaussian::new(spec.seed, 2, 0)),
            walk: (sigma_walk > 0.0).then(|| BlockGaussian::new(spec.seed, 3, 0)),
            phase_now,
            walk_state: 0.0,
        }
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    #[inline]
    pub fn next_sample(&mut self) -> f64 {
        let mut v = self.spec.linear_drift * self.index as f64 / self.rate;
        if let Some(g) = self.phase.as_mut() {
            let next = g.next() * self.sigma_phase;
            v += (next - self.phase_now) * self.rate / TAU;
            self.phase_now = next;
        }
        if let Some(g) = self.freq.as_mut() {
            v += g.next() * self.sigma_freq;
        }
        if let Some(g) = self.walk.as_mut() {
            self.walk_state += g.next() * self.sigma_walk;
            v += self.walk_state;
        }
        self.index += 1;
        v
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for x in out.iter_mut() {
            *x = self.next_sample();
        }
    }
}

/// `n` samples of frequency fluctuation at `rate`, reproducible from the seed.
pub fn generate_power_law_noise(spec: &NoiseSpec, n: usize, rate: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    if !spec.is_silent() {
        NoiseStream::new(spec, rate).fill(&mut out);
    }
    out
}

/// White-frequency level giving a fractional Allan deviation `sigma_y` at
/// 1 s on an optical carrier `carrier_hz`.
pub fn white_level_from_stability(sigma_y: f64, carrier_hz: f64) -> f64 {
    // white FM: σ_Δν(τ)² = h0 / (2τ)
    let sigma_hz = sigma_y * carrier_hz;
    2.0 * sigma_hz * sigma_hz
}
