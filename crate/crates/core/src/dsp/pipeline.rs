//! Raw samples to decimated phase increments, one channel.

use super::config::DemodConfig;
use super::decimate::{design_decimator, FirDecimator};
use super::demod::{default_bank, Demodulator, FilterBank, IqOutput};
use super::phase::{extract_amplitude_phase, unwrap_increment, PhaseAmplitudeSample, PhaseIncrementStream};
use crate::error::Result;

/// One sample at the output rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSample {
    /// Phase change over one output period, rad.
    pub increment: f64,
    pub amplitude: f64,
    pub settling: bool,
}

/// One sample at the intermediate rate, after unwrapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntermediateSample {
    pub sample_index: u64,
    pub phase: PhaseAmplitudeSample,
    pub increment: f64,
    pub settling: bool,
}

/// Streaming demodulation chain for a single input channel.
///
/// The chain is deterministic and keeps all state in the struct, so several
/// channels can run on separate threads.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: DemodConfig,
    demod: Demodulator,
    prev_phase: Option<f64>,
    decim_inc: FirDecimator,
    decim_amp: FirDecimator,
    output_ratio: f64,
}

impl Pipeline {
    pub fn new(config: DemodConfig) -> Result<Self> {
        let bank = default_bank(&config)?;
        Self::with_bank(config, bank)
    }

    pub fn with_bank(config: DemodConfig, bank: FilterBank) -> Result<Self> {
        let taps = design_decimator(&config)?;
        let ratio = config.output_ratio();
        Ok(Pipeline {
            demod: Demodulator::new(bank, &config)?,
            prev_phase: None,
            decim_inc: FirDecimator::new(&taps, ratio)?,
            decim_amp: FirDecimator::new(&taps, ratio)?,
            output_ratio: ratio as f64,
            config,
        })
    }

    pub fn config(&self) -> &DemodConfig {
        &self.config
    }

    fn intermediate(&mut self, o: IqOutput) -> IntermediateSample {
        let pa = extract_amplitude_phase(o.iq);
        let (increment, first) = match self.prev_phase {
            Some(prev) => (unwrap_increment(prev, pa.wrapped_phase), false),
            None => (0.0, true),
        };
        self.prev_phase = Some(pa.wrapped_phase);
        IntermediateSample {
            sample_index: o.sample_index,
            phase: pa,
            increment,
            settling: o.settling || first,
        }
    }

    /// Process raw samples, calling `on_int` for every intermediate sample and
    /// `on_out` for every output sample.
    pub fn process_with<I, O>(&mut self, raw: &[f64], mut on_int: I, mut on_out: O)
    where
        I: FnMut(&IntermediateSample),
        O: FnMut(OutputSample),
    {
        let mut pending: Vec<IqOutput> = Vec::with_capacity(raw.len() / self.config.demod_ratio() + 1);
        self.demod.process(raw, |o| pending.push(o));
        for o in pending {
            let s = self.intermediate(o);
            on_int(&s);
            let inc = self.decim_inc.push(s.increment, s.settling);
            let amp = self.decim_amp.push(s.phase.amplitude, s.settling);
            if let (Some((d, settling)), Some((a, _))) = (inc, amp) {
                on_out(OutputSample {
                    increment: d * self.output_ratio,
                    amplitude: a,
                    settling,
                });
            }
        }
    }

    /// Process raw samples and append output samples to `out`.
    pub fn process(&mut self, raw: &[f64], out: &mut Vec<OutputSample>) {
        self.process_with(raw, |_| {}, |s| out.push(s));
    }

    /// Run a whole record and return the settled output stream.
    pub fn run(config: DemodConfig, raw: &[f64]) -> Result<PhaseIncrementStream> {
        let mut p = Pipeline::new(config)?;
        let mut out = Vec::with_capacity(raw.len() / (config.demod_ratio() * config.output_ratio()) + 1);
        p.process(raw, &mut out);
        let settled: Vec<_> = out.into_iter().filter(|s| !s.settling).collect();
        Ok(PhaseIncrementStream {
            increments: settled.iter().map(|s| s.increment).collect(),
            amplitudes: settled.iter().map(|s| s.amplitude).collect(),
            rate: config.f_out,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::phase::increments_to_frequency;
    use std::f64::consts::TAU;

    #[test]
    fn offset_tone_frequency() {
        let cfg = DemodConfig::nominal(100e3, 4e3).unwrap();
        let offset = 1234.5;
        let raw: Vec<f64> = (0..400_000u64)
            .map(|n| {
                let cycles = (n % 4) as f64 / 4.0 + (offset * n as f64 / cfg.f_smp).fract();
                0.8 * (TAU * cycles).sin()
            })
            .collect();
        let out = Pipeline::run(cfg, &raw).unwrap();
        assert!(!out.is_empty());
        for (f, a) in increments_to_frequency(&out).iter().zip(&out.amplitudes) {
            assert!((f - offset).abs() < 1e-6, "{f}");
            assert!((a - 0.8).abs() < 0.05);
        }
    }

    #[test]
    fn chunking_is_invisible() {
        let cfg = DemodConfig::nominal(50e3, 1e3).unwrap();
        let raw: Vec<f64> = (0..300_000u64)
            .map(|n| (TAU * ((n % 4) as f64 / 4.0 + 37.0 * n as f64 / cfg.f_smp)).sin())
            .collect();
        let mut a = Pipeline::new(cfg).unwrap();
        let mut b = Pipeline::new(cfg).unwrap();
        let (mut oa, mut ob) = (Vec::new(), Vec::new());
        a.process(&raw, &mut oa);
        for c in raw.chunks(1013) {
            b.process(c, &mut ob);
        }
        assert_eq!(oa, ob);
        assert!(oa.iter().take(12).all(|s| s.settling));
    }
}
