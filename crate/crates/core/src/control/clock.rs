//! OCXO timebase and the resynchronization schedule.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcxoModel {
    /// Nominal output, Hz.
    pub nominal: f64,
    pub fractional_offset: f64,
    /// Linear fractional frequency drift, 1/s.
    pub drift_rate: f64,
    /// One-sided PSD of white fractional frequency noise, 1/Hz.
    pub white_noise_level: f64,
    /// Tuning slope, Hz/V.
    pub tune_sensitivity: f64,
    /// Applied tuning voltage, V.
    pub tune_voltage: f64,
    pub seed: u64,
}

impl Default for OcxoModel {
    fn default() -> Self {
        OcxoModel {
            nominal: 10e6,
            fractional_offset: 0.0,
            drift_rate: 2e-13,
            white_noise_level: 0.0,
            tune_sensitivity: 1.0,
            tune_voltage: 0.0,
            seed: 0,
        }
    }
}

impl OcxoModel {
    pub fn ideal() -> Self {
        OcxoModel {
            drift_rate: 0.0,
            ..Default::default()
        }
    }

    /// Fractional frequency contributed by the tuning voltage.
    pub fn tune_fraction(&self) -> f64 {
        self.tune_voltage * self.tune_sensitivity / self.nominal
    }

    /// Deterministic fractional frequency at true time `t`.
    pub fn fractional_frequency(&self, t: f64) -> f64 {
        self.fractional_offset + self.tune_fraction() + self.drift_rate * t
    }
}

/// Running state of one board clock.
#[derive(Debug, Clone)]
pub struct ClockState {
    pub true_time: f64,
    /// Local minus true time, accumulated separately to keep precision.
    offset: f64,
    rng: ChaCha8Rng,
}

impl ClockState {
    pub fn new(model: &OcxoModel) -> Self {
        ClockState {
            true_time: 0.0,
            offset: 0.0,
            rng: rng::derived(model.seed, 0xc10c),
        }
    }

    pub fn local_time(&self) -> f64 {
        self.true_time + self.offset
    }

    /// Local minus true time, s.
    pub fn error(&self) -> f64 {
        self.offset
    }
}

/// Advance the clock by `true_dt` seconds of true time and return the
/// elapsed local time.
pub fn clock_advance(model: &OcxoModel, state: &mut ClockState, true_dt: f64) -> f64 {
    let mid = state.true_time + 0.5 * true_dt;
    let mut y = model.fractional_frequency(mid);
    if model.white_noise_level > 0.0 {
        // mean of white y over the interval has variance h/(2·dt)
        let sigma = (model.white_noise_level / (2.0 * true_dt)).sqrt();
        y += sigma * state.rng.sample::<f64, _>(StandardNormal);
    }
    state.true_time += true_dt;
    state.offset += true_dt * y;
    true_dt * (1.0 + y)
}

/// Default cap on the resynchronization interval, s.
pub const RESYNC_CAP: f64 = 3600.0;
/// Dead time inserted in the record by a resynchronization, s.
pub const RESYNC_LATENCY: f64 = 110e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyncState {
    pub sigma_sync: f64,
    pub last_resync: f64,
    pub resync_interval: f64,
    /// Timescale error relative to the reference board, s.
    pub accumulated_offset: f64,
    /// Upper bound on the interval, s.
    pub max_interval: f64,
}

impl Default for SyncState {
    fn default() -> Self {
        SyncState {
            sigma_sync: 5e-6 / 3f64.sqrt(),
            last_resync: 0.0,
            resync_interval: RESYNC_CAP,
            accumulated_offset: 0.0,
            max_interval: RESYNC_CAP,
        }
    }
}

/// Time for a pure quadratic drift `½·D·t²` to reach `sigma`.
pub fn drift_horizon(sigma: f64, drift_rate: f64) -> f64 {
    if drift_rate == 0.0 {
        f64::INFINITY
    } else {
        (2.0 * sigma / drift_rate.abs()).sqrt()
    }
}

/// Set the interval to `min(cap, √(2σ/D))` and return the next resync time.
pub fn schedule_resync(state: &mut SyncState, model: &OcxoModel) -> f64 {
    state.resync_interval = drift_horizon(state.sigma_sync, model.drift_rate).min(state.max_interval);
    state.last_resync + state.resync_interval
}

/// Outcome of a resynchronization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResyncEvent {
    pub time: f64,
    pub offset_before: f64,
    pub offset_after: f64,
    pub latency: f64,
}

/// Re-trigger at `now`: the timescale error becomes the fresh trigger
/// jitter, and the tuning voltage is moved against the measured
/// fractional frequency (`gain` of 1 cancels it fully).
pub fn apply_resync(
    state: &mut SyncState,
    model: &mut OcxoModel,
    now: f64,
    jitter: f64,
    measured_fractional_rate: f64,
    gain: f64,
) -> ResyncEvent {
    let before = state.accumulated_offset;
    state.accumulated_offset = jitter;
    state.last_resync = now;
    if model.tune_sensitivity != 0.0 {
        model.tune_voltage -= gain * measured_fractional_rate * model.nominal / model.tune_sensitivity;
    }
    ResyncEvent {
        time: now,
        offset_before: before,
        offset_after: jitter,
        latency: RESYNC_LATENCY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_clock() {
        let m = OcxoModel::ideal();
        let mut s = ClockState::new(&m);
        for _ in 0..10 {
            assert_eq!(clock_advance(&m, &mut s, 0.5), 0.5);
        }
    }

    #[test]
    fn quadratic_accumulation() {
        let m = OcxoModel::default();
        let mut s = ClockState::new(&m);
        for _ in 0..5477 {
            clock_advance(&m, &mut s, 1.0);
        }
        let expect = 0.5 * 2e-13 * 5477f64.powi(2);
        assert!((s.error() / expect - 1.0).abs() < 1e-6);
        assert!((s.error() - 3.0e-6).abs() < 0.01e-6);
    }

    #[test]
    fn linear_offset() {
        let m = OcxoModel {
            fractional_offset: 1e-10,
            drift_rate: 0.0,
            ..Default::default()
        };
        let mut s = ClockState::new(&m);
        for _ in 0..1000 {
            clock_advance(&m, &mut s, 1.0);
        }
        assert!((s.error() - 100e-9).abs() < 1e-15);
    }

    #[test]
    fn interval_is_capped() {
        let mut st = SyncState {
            sigma_sync: 3e-6,
            ..Default::default()
        };
        let m = OcxoModel::default();
        assert!((drift_horizon(3e-6, 2e-13) - 5477.2).abs() < 0.1);
        assert_eq!(schedule_resync(&mut st, &m), 3600.0);
        let no_drift = OcxoModel::ideal();
        assert_eq!(schedule_resync(&mut st, &no_drift), 3600.0);
        st.max_interval = f64::INFINITY;
        assert!(schedule_resync(&mut st, &no_drift).is_infinite());
    }

    #[test]
    fn hourly_resync_bounds_relative_error() {
        let sigma = 3e-6;
        let d = 2e-13;
        let mut m1 = OcxoModel {
            fractional_offset: 1e-10,
            ..Default::default()
        };
        let mut m2 = OcxoModel {
            fractional_offset: -1e-10,
            ..Default::default()
        };
        let mut sync = SyncState {
            sigma_sync: sigma,
            ..Default::default()
        };
        let (mut c1, mut c2) = (ClockState::new(&m1), ClockState::new(&m2));
        let mut base = 0.0;
        let mut next = schedule_resync(&mut sync, &m1);
        let bound = sigma + 0.5 * d * 3600f64.powi(2);
        let dt = 10.0;
        let mut worst: f64 = 0.0;
        for k in 1..=(24 * 3600 / 10) {
            let t = k as f64 * dt;
            clock_advance(&m1, &mut c1, dt);
            clock_advance(&m2, &mut c2, dt);
            let rel = sync.accumulated_offset + (c1.error() - c2.error()) - base;
            worst = worst.max(rel.abs());
            assert!(rel.abs() <= bound, "t={t}: {rel}");
            if t >= next {
                let rate = (m1.fractional_frequency(t) - m2.fractional_frequency(t)) / 2.0;
                let jitter = if k % 2 == 0 { 1e-6 } else { -1e-6 };
                apply_resync(&mut sync, &mut m1, t, jitter, rate, 1.0);
                apply_resync(&mut sync, &mut m2, t, jitter, -rate, 1.0);
                base = c1.error() - c2.error();
                next = schedule_resync(&mut sync, &m1);
            }
        }
        assert!(worst > 0.0);
    }
}
