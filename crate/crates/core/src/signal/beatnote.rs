//! Analog beatnote synthesis at the ADC sample rate.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::noise::{NoiseSpec, NoiseStream};
use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToneSpec {
    /// Peak amplitude, volts.
    pub amplitude: f64,
    /// Carrier frequency, Hz.
    pub carrier: f64,
    /// Phase at sample 0, rad.
    pub initial_phase: f64,
}

impl ToneSpec {
    pub fn new(amplitude: f64, carrier: f64, initial_phase: f64) -> Self {
        ToneSpec {
            amplitude,
            carrier,
            initial_phase,
        }
    }

    fn validate(&self, rate: f64) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return param(format!("tone amplitude must be non-negative, got {}", self.amplitude));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return param(format!("sample rate must be positive, got {rate}"));
        }
        if !(self.carrier >= 0.0) || rate < 2.0 * self.carrier {
            return param(format!(
                "carrier {} Hz violates Nyquist at {} Hz sampling",
                self.carrier, rate
            ));
        }
        Ok(())
    }
}

/// Carrier cycles `k·n` reduced modulo 1 with high precision.
///
/// `k` is split into a part with 20 fractional bits, whose product with `n`
/// is exact, and a small remainder.
#[derive(Debug, Clone, Copy)]
struct CarrierPhase {
    hi: f64,
    lo: f64,
}

impl CarrierPhase {
    fn new(carrier: f64, rate: f64) -> Self {
        let scale = (1u64 << 20) as f64;
        let hi = (carrier / rate * scale).round() / scale;
        // hi·rate is exact for typical rates, so the remainder keeps full precision
        let lo = (-hi).mul_add(rate, carrier) / rate;
        CarrierPhase { hi, lo }
    }

    #[inline]
    fn cycles(&self, n: u64) -> f64 {
        let n = n as f64;
        (self.hi * n).fract() + self.lo * n
    }
}

/// Streaming synthesizer for `A·sin(2π·carrier·n/rate + φ[n])`.
#[derive(Debug, Clone)]
pub struct BeatnoteStream {
    tone: ToneSpec,
    rate: f64,
    carrier: CarrierPhase,
    noise: Option<NoiseStream>,
    index: u64,
    /// Accumulated noise phase, rad.
    phase: f64,
}

impl BeatnoteStream {
    pub fn new(tone: &ToneSpec, noise: &NoiseSpec, rate: f64) -> Result<Self> {
        tone.validate(rate)?;
        noise.validate()?;
        Ok(BeatnoteStream {
            tone: *tone,
            rate,
            carrier: CarrierPhase::new(tone.carrier, rate),
            noise: (!noise.is_silent()).then(|| NoiseStream::new(noise, rate)),
            index: 0,
            phase: tone.initial_phase,
        })
    }

    #[inline]
    pub fn next_sample(&mut self) -> f64 {
        let v = self.tone.amplitude * (TAU * self.carrier.cycles(self.index) + self.phase).sin();
        if let Some(noise) = self.noise.as_mut() {
            self.phase += TAU * noise.next_sample() / self.rate;
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

/// Sampled beatnote of length `round(duration·rate)`.
pub fn synthesize_beatnote(tone: &ToneSpec, noise: &NoiseSpec, duration: f64, rate: f64) -> Result<Vec<f64>> {
    if !(duration >= 0.0 && duration.is_finite()) {
        return param(format!("duration must be non-negative, got {duration}"));
    }
    let mut s = BeatnoteStream::new(tone, noise, rate)?;
    let mut out = vec![0.0; (duration * rate).round() as usize];
    s.fill(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_four_at_quarter_rate() {
        let phi = 0.4f64;
        let v = synthesize_beatnote(&ToneSpec::new(1.0, 1e6, phi), &NoiseSpec::default(), 2e-6, 4e6).unwrap();
        let expect = [phi.sin(), phi.cos(), -phi.sin(), -phi.cos()];
        for (k, x) in v.iter().enumerate() {
            assert!((x - expect[k % 4]).abs() < 1e-12, "{k}: {x}");
        }
    }

    #[test]
    fn nyquist_rejected() {
        let r = synthesize_beatnote(&ToneSpec::new(1.0, 3e6, 0.0), &NoiseSpec::default(), 1e-3, 4e6);
        assert!(r.is_err());
        let r = synthesize_beatnote(&ToneSpec::new(-1.0, 1e6, 0.0), &NoiseSpec::default(), 1e-3, 4e6);
        assert!(r.is_err());
    }

    #[test]
    fn carrier_phase_precision() {
        let carrier = 1e6 + 1e-3;
        let c = CarrierPhase::new(carrier, 4e6);
        let n = 40_000_000u64;
        // n/4 is an integer, leaving the offset (exact in f64 as a difference)
        let expect = (carrier - 1e6) * n as f64 / 4e6;
        let got = c.cycles(n).rem_euclid(1.0);
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn chunked_equals_block() {
        let tone = ToneSpec::new(0.5, 1e6, 0.1);
        let noise = NoiseSpec::white_frequency(1.0, 3);
        let a = synthesize_beatnote(&tone, &noise, 0.01, 4e6).unwrap();
        let mut s = BeatnoteStream::new(&tone, &noise, 4e6).unwrap();
        let mut b = vec![0.0; a.len()];
        for c in b.chunks_mut(999) {
            s.fill(c);
        }
        assert_eq!(a, b);
    }
}
