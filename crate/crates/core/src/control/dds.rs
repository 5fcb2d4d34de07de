//! Direct digital synthesizer frequency quantization.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct DdsModel {
    /// Reference clock, Hz.
    pub clock: u64,
    pub word_bits: u32,
    pub current_word: u64,
}

impl Default for DdsModel {
    fn default() -> Self {
        DdsModel {
            clock: 500_000_000,
            word_bits: 48,
            current_word: 0,
        }
    }
}

impl DdsModel {
    /// Frequency step of one tuning-word LSB, Hz.
    pub fn lsb(&self) -> f64 {
        self.clock as f64 / 2f64.powi(self.word_bits as i32)
    }

    pub fn word_to_frequency(&self, word: u64) -> f64 {
        word as f64 * self.lsb()
    }

    pub fn frequency(&self) -> f64 {
        self.word_to_frequency(self.current_word)
    }
}

/// Program the nearest tuning word; returns `(word, actual frequency)`.
pub fn dds_quantize(requested: f64, model: &mut DdsModel) -> Result<(u64, f64)> {
    let nyquist = model.clock as f64 / 2.0;
    if !(requested >= 0.0 && requested < nyquist) {
        return param(format!("DDS request {requested} Hz outside [0, {nyquist})"));
    }
    let word = (requested / model.lsb()).round() as u64;
    model.current_word = word;
    Ok((word, model.word_to_frequency(word)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_request() {
        let mut d = DdsModel::default();
        assert_eq!(dds_quantize(0.0, &mut d).unwrap(), (0, 0.0));
    }

    #[test]
    fn lsb_value() {
        let d = DdsModel::default();
        assert!((d.lsb() - 1.7763568394002505e-6).abs() < 1e-18);
    }

    #[test]
    fn forty_megahertz_within_half_lsb() {
        let mut d = DdsModel::default();
        let (_, actual) = dds_quantize(40e6, &mut d).unwrap();
        assert!((actual - 40e6).abs() <= 0.9e-6);
        assert_eq!(d.frequency(), actual);
    }

    #[test]
    fn out_of_range() {
        let mut d = DdsModel::default();
        assert!(dds_quantize(-1.0, &mut d).is_err());
        assert!(dds_quantize(250e6, &mut d).is_err());
        assert!(dds_quantize(f64::NAN, &mut d).is_err());
    }

    #[test]
    fn word_round_trip_samples() {
        let mut d = DdsModel::default();
        for word in [0u64, 1, 2, 12345, 1 << 40, (1u64 << 47) - 1] {
            let f = d.word_to_frequency(word);
            assert_eq!(dds_quantize(f, &mut d).unwrap().0, word);
        }
    }
}
