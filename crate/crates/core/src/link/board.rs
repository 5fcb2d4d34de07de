//! One acquisition board: configuration and the armed trigger stage.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::control::{OcxoModel, PidConfig, TriggerConfig};
use crate::dsp::{default_bank, extract_amplitude_phase, DemodConfig, Demodulator, FilterBank};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BoardInstance {
    pub demod: DemodConfig,
    pub clock: OcxoModel,
    pub trigger: TriggerConfig,
    pub pid: PidConfig,
    /// Fixed offset added to this board's start time, s.
    pub timescale_offset: f64,
    /// Beatnote amplitude at the ADC, V.
    pub amplitude: f64,
}

impl BoardInstance {
    pub fn new(demod: DemodConfig) -> Self {
        BoardInstance {
            demod,
            clock: OcxoModel::default(),
            trigger: TriggerConfig::default(),
            pid: PidConfig::default(),
            timescale_offset: 0.0,
            amplitude: 1.0,
        }
    }
}

/// How the synchronization edge is imprinted on the beatnote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TriggerEncoding {
    /// Frequency step that pushes the beatnote out of the detection band, Hz.
    pub step: f64,
    /// Deterministic delay between detection and the first acquired
    /// sample, s. Together with the filter delay this gives the measured
    /// mean start latency of about 32 µs.
    pub start_latency: f64,
}

impl Default for TriggerEncoding {
    fn default() -> Self {
        TriggerEncoding {
            step: 250e3,
            start_latency: 9.5e-6,
        }
    }
}

/// Armed-mode front end of one board, reusable across trials.
#[derive(Debug, Clone)]
pub struct ArmedFrontEnd {
    config: DemodConfig,
    bank: FilterBank,
    trigger: TriggerConfig,
    amplitude: f64,
}

/// Outcome of one trigger detection, absolute times in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriggerEvent {
    pub arrival: f64,
    pub detection: f64,
}

impl ArmedFrontEnd {
    pub fn new(board: &BoardInstance) -> Result<Self> {
        let config = board.demod.armed()?;
        Ok(ArmedFrontEnd {
            bank: default_bank(&config)?,
            config,
            trigger: TriggerConfig {
                check_rate: config.f_int,
                ..board.trigger
            },
            amplitude: board.amplitude,
        })
    }

    /// Simulate the return of the beatnote into the band at `arrival` and
    /// find the check at which the trigger condition is first met.
    ///
    /// The board's sample grid has a uniformly random phase with respect
    /// to the edge, covering both the ADC clock and the output decimation.
    pub fn detect<R: Rng>(&self, arrival: f64, step: f64, rng: &mut R) -> Result<TriggerEvent> {
        let fs = self.config.f_smp;
        let ratio = self.config.demod_ratio();
        let taps = self.config.demod_taps();
        let lead = taps + 2 * ratio;
        let tail = taps + 4 * ratio;
        let grid: f64 = rng.random_range(0.0..ratio as f64);
        let carrier_phase: f64 = rng.random_range(0.0..TAU);
        // sample n sits at arrival + (n - lead - grid)/fs
        let rel = |n: usize| (n as f64 - lead as f64 - grid) / fs;
        let raw: Vec<f64> = (0..lead + tail)
            .map(|n| {
                let t = rel(n);
                let offset = step * t.min(0.0);
                self.amplitude * (carrier_phase + TAU * ((self.config.nu0 * t).fract() + offset.fract())).sin()
            })
            .collect();
        let mut demod = Demodulator::new(self.bank.clone(), &self.config)?;
        let mut prev = None;
        let mut hit = None;
        demod.process(&raw, |o| {
            if hit.is_some() || o.settling {
                return;
            }
            let s = extract_amplitude_phase(o.iq);
            if let Some(p) = prev {
                if self.trigger.fires(&p, &s) {
                    hit = Some(o.sample_index as usize);
                }
            }
            prev = Some(s);
        });
        match hit {
            Some(n) => Ok(TriggerEvent {
                arrival,
                detection: arrival + rel(n),
            }),
            None => Err(Error::Experiment(format!(
                "trigger not detected: a {step} Hz step does not leave the detection band"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn board() -> BoardInstance {
        BoardInstance::new(DemodConfig::nominal(100e3, 1e3).unwrap())
    }

    #[test]
    fn latency_is_filter_delay_plus_one_check() {
        let fe = ArmedFrontEnd::new(&board()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let lat: Vec<f64> = (0..400)
            .map(|_| {
                let e = fe.detect(1.0, 250e3, &mut rng).unwrap();
                e.detection - e.arrival
            })
            .collect();
        let min = lat.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = lat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // half of the 40 µs armed filter, then up to one 5 µs check period
        assert!(min > 17e-6 && max < 28e-6, "{min} {max}");
        assert!(max - min > 4e-6 && max - min < 6e-6, "{}", max - min);
    }

    #[test]
    fn in_band_step_never_triggers() {
        let fe = ArmedFrontEnd::new(&board()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(fe.detect(0.0, 1e3, &mut rng), Err(Error::Experiment(_))));
    }
}
