//! Amplitude/phase extraction, unwrapping and frequency reconstruction.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::demod::IqSample;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseAmplitudeSample {
    pub amplitude: f64,
    /// Wrapped phase in (-π, +π].
    pub wrapped_phase: f64,
    /// Set when I = Q = 0 and the phase is undefined.
    pub carrier_lost: bool,
}

/// Amplitude `2·|I + iQ|` and wrapped phase `atan2(Q, I)`.
pub fn extract_amplitude_phase(iq: IqSample) -> PhaseAmplitudeSample {
    if iq.i == 0.0 && iq.q == 0.0 {
        return PhaseAmplitudeSample {
            amplitude: 0.0,
            wrapped_phase: 0.0,
            carrier_lost: true,
        };
    }
    let mut phase = iq.q.atan2(iq.i);
    if phase == -PI {
        phase = PI;
    }
    PhaseAmplitudeSample {
        amplitude: 2.0 * iq.i.hypot(iq.q),
        wrapped_phase: phase,
        carrier_lost: false,
    }
}

/// Unwrapped phase increment between two wrapped phases.
#[inline]
pub fn unwrap_increment(prev_phase: f64, curr_phase: f64) -> f64 {
    let d = curr_phase - prev_phase;
    if d > PI {
        d - TAU
    } else if d < -PI {
        d + TAU
    } else {
        d
    }
}

/// Wrap an angle into (-π, +π].
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = phase % TAU;
    if p > PI {
        p -= TAU;
    } else if p <= -PI {
        p += TAU;
    }
    p
}

/// Unwrapped phase increments with amplitudes at a fixed rate.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseIncrementStream {
    pub increments: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub rate: f64,
}

impl PhaseIncrementStream {
    pub fn new(increments: Vec<f64>, amplitudes: Vec<f64>, rate: f64) -> Self {
        debug_assert_eq!(increments.len(), amplitudes.len());
        PhaseIncrementStream {
            increments,
            amplitudes,
            rate,
        }
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// Build a stream from frequency deviations (Hz) at `rate`.
    pub fn from_frequency(dnu: &[f64], amplitude: f64, rate: f64) -> Self {
        let k = TAU / rate;
        PhaseIncrementStream {
            increments: dnu.iter().map(|f| f * k).collect(),
            amplitudes: vec![amplitude; dnu.len()],
            rate,
        }
    }
}

/// Frequency deviation `δφ·rate/2π` for every increment, Hz.
pub fn increments_to_frequency(stream: &PhaseIncrementStream) -> Vec<f64> {
    let k = stream.rate / TAU;
    stream.increments.iter().map(|d| d * k).collect()
}
