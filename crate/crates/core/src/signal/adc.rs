//! ADC front-end: mid-tread quantization with ENOB-limited noise.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdcModel {
    pub bits: u32,
    /// Input span, volts. Codes `0` and `2^bits − 1` sit at `0` and `full_scale`.
    pub full_scale: f64,
    pub enob: f64,
    /// Front-end voltage gain applied by [`AdcModel::condition`].
    pub gain: f64,
    /// Bias added after the gain so a bipolar signal sits mid-range.
    pub offset: f64,
    pub rate: f64,
    pub noise_seed: u64,
}

impl Default for AdcModel {
    fn default() -> Self {
        AdcModel {
            bits: 14,
            full_scale: 2.5,
            enob: 12.2,
            gain: 15.0,
            offset: 1.25,
            rate: 4e6,
            noise_seed: 0,
        }
    }
}

impl AdcModel {
    pub fn max_code(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn lsb(&self) -> f64 {
        self.full_scale / self.max_code() as f64
    }

    /// RMS noise of an ideal converter with `enob` bits over the same span.
    pub fn total_noise_rms(&self) -> f64 {
        self.full_scale / 2f64.powf(self.enob) / 12f64.sqrt()
    }

    /// Analog noise added ahead of the quantizer so quantization plus
    /// this noise has the ENOB-equivalent variance.
    pub fn excess_noise_rms(&self) -> f64 {
        let total = self.total_noise_rms().powi(2);
        let quant = self.lsb().powi(2) / 12.0;
        (total - quant).max(0.0).sqrt()
    }

    /// Map a front-end input voltage into the ADC input range.
    pub fn condition(&self, v: f64) -> f64 {
        self.gain * v + self.offset
    }

    /// Convert a code back to volts relative to the bias point.
    pub fn code_to_volts(&self, code: u16) -> f64 {
        code as f64 * self.lsb() - self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdcOutput {
    pub codes: Vec<u16>,
    /// Number of samples clipped at either end of the range.
    pub saturated: usize,
}

impl AdcOutput {
    pub fn is_saturated(&self) -> bool {
        self.saturated > 0
    }

    /// Bipolar volts at the ADC input, bias removed.
    pub fn to_volts(&self, model: &AdcModel) -> Vec<f64> {
        self.codes.iter().map(|&c| model.code_to_volts(c)).collect()
    }
}

/// Quantize an already conditioned voltage series.
pub fn adc_quantize(analog: &[f64], model: &AdcModel) -> AdcOutput {
    let lsb = model.lsb();
    let max = model.max_code() as f64;
    let sigma = model.excess_noise_rms();
    let mut rng = (sigma > 0.0).then(|| rng::derived(model.noise_seed, 0xadc));
    let mut saturated = 0;
    let codes = analog
        .iter()
        .map(|&v| {
            let noisy = match rng.as_mut() {
                Some(r) => v + sigma * r.sample::<f64, _>(StandardNormal),
                None => v,
            };
            let c = (noisy / lsb).round();
            if c < 0.0 || c > max {
                saturated += 1;
            }
            c.clamp(0.0, max) as u16
        })
        .collect();
    AdcOutput { codes, saturated }
}

/// Bias a bipolar at-ADC signal to mid-range, quantize, and return volts
/// with the bias removed. The front-end gain is not applied.
pub fn digitize_bipolar(signal: &[f64], model: &AdcModel) -> (Vec<f64>, usize) {
    let biased: Vec<f64> = signal.iter().map(|v| v + model.offset).collect();
    let out = adc_quantize(&biased, model);
    (out.to_volts(model), out.saturated)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_endpoints() {
        let m = AdcModel::default();
        let out = adc_quantize(&[0.0, 2.5], &AdcModel { enob: 14.0, ..m });
        assert_eq!(out.codes, vec![0, 16383]);
        assert!(!out.is_saturated());
    }

    #[test]
    fn clipping_is_flagged() {
        let m = AdcModel {
            enob: 14.0,
            ..Default::default()
        };
        let out = adc_quantize(&[-0.1, 1.0, 2.7], &m);
        assert_eq!(out.codes[0], 0);
        assert_eq!(out.codes[2], 16383);
        assert_eq!(out.saturated, 2);
    }

    #[test]
    fn ideal_converter_is_noiseless_at_code_centers() {
        let m = AdcModel {
            enob: 14.0,
            ..Default::default()
        };
        assert_eq!(m.excess_noise_rms(), 0.0);
        let v = 1234.0 * m.lsb();
        let out = adc_quantize(&vec![v; 1000], &m);
        assert!(out.codes.iter().all(|&c| c == 1234));
    }

    #[test]
    fn enob_sets_total_noise() {
        let m = AdcModel::default();
        let v = vec![1.0; 200_000];
        let volts = adc_quantize(&v, &m).to_volts(&m);
        let mean = volts.iter().sum::<f64>() / volts.len() as f64;
        let var = volts.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / volts.len() as f64;
        let expect = m.total_noise_rms();
        assert!((var.sqrt() / expect - 1.0).abs() < 0.05, "{} vs {}", var.sqrt(), expect);
    }

    #[test]
    fn conditioning() {
        let m = AdcModel::default();
        assert_eq!(m.condition(0.0), 1.25);
        assert!((m.condition(0.05) - 2.0).abs() < 1e-12);
    }
}
