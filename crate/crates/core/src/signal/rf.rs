//! Frequency-domain model of the RF down-conversion chain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfChain {
    /// Local oscillator, Hz.
    pub f_lo: f64,
    /// Fixed AOM shift, Hz.
    pub f_off: f64,
    /// Nominal frequency of the actuated AOM, Hz.
    pub f_drift_nominal: f64,
    /// Anti-alias low-pass corner after the mixer, Hz.
    pub lpf_cutoff: f64,
}

impl Default for RfChain {
    fn default() -> Self {
        RfChain {
            f_lo: 41e6,
            f_off: 40e6,
            f_drift_nominal: 40e6,
            lpf_cutoff: 1.9e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Downconverted {
    /// Baseband carrier frequency per sample, Hz.
    pub freqs: Vec<f64>,
    /// Number of samples that landed exactly on DC.
    pub degenerate: usize,
}

/// Ideal mixer plus low-pass: keeps `|rf − f_lo|`, discards the sum term.
pub fn mix_downconvert(rf_freq: &[f64], chain: &RfChain) -> Result<Downconverted> {
    let mut degenerate = 0;
    let mut freqs = Vec::with_capacity(rf_freq.len());
    for &rf in rf_freq {
        let f = (rf - chain.f_lo).abs();
        if !f.is_finite() || f > chain.lpf_cutoff {
            return Err(Error::OutOfBand {
                freq: f,
                low: 0.0,
                high: chain.lpf_cutoff,
            });
        }
        if f == 0.0 {
            degenerate += 1;
        }
        freqs.push(f);
    }
    Ok(Downconverted { freqs, degenerate })
}
