//! Threshold trigger on the demodulated amplitude or phase.

use serde::{Deserialize, Serialize};

use crate::dsp::config::ARMED_F_INT;
use crate::dsp::PhaseAmplitudeSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TriggerChannel {
    #[default]
    Amplitude,
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    #[default]
    Rising,
    Falling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriggerConfig {
    pub channel: TriggerChannel,
    /// Volts for the amplitude channel, radians for the phase channel.
    pub threshold: f64,
    pub edge: Edge,
    /// Rate at which the condition is evaluated, Hz.
    pub check_rate: f64,
}

impl Default for TriggerConfig {
    fn default() -> Self {
        TriggerConfig {
            channel: TriggerChannel::Amplitude,
            threshold: 0.5,
            edge: Edge::Rising,
            check_rate: ARMED_F_INT,
        }
    }
}

impl TriggerConfig {
    fn value(&self, s: &PhaseAmplitudeSample) -> f64 {
        match self.channel {
            TriggerChannel::Amplitude => s.amplitude,
            TriggerChannel::Phase => s.wrapped_phase,
        }
    }

    /// Whether the transition `prev → curr` satisfies the edge condition.
    pub fn fires(&self, prev: &PhaseAmplitudeSample, curr: &PhaseAmplitudeSample) -> bool {
        let (a, b) = (self.value(prev), self.value(curr));
        match self.edge {
            Edge::Rising => a < self.threshold && b >= self.threshold,
            Edge::Falling => a > self.threshold && b <= self.threshold,
        }
    }
}

/// Index of the first sample completing an edge through the threshold.
pub fn detect_trigger(stream: &[PhaseAmplitudeSample], config: &TriggerConfig) -> Option<usize> {
    stream
        .windows(2)
        .position(|w| config.fires(&w[0], &w[1]))
        .map(|i| i + 1)
}
