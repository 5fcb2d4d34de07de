//! Windowed-sinc FIR design.

use std::f64::consts::PI;

use crate::error::{param, Result};

/// Hamming window of length `n` (symmetric).
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|k| 0.54 - 0.46 * (2.0 * PI * k as f64 / m).cos())
        .collect()
}

/// Low-pass FIR with a Hamming-windowed sinc, normalized to unit DC gain.
///
/// `cutoff` and `rate` are in Hz. The result is symmetric about its midpoint.
pub fn design_lowpass_hamming(num_taps: usize, cutoff: f64, rate: f64) -> Result<Vec<f64>> {
    if num_taps < 2 {
        return param(format!("need at least 2 taps, got {num_taps}"));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return param(format!("rate must be positive, got {rate}"));
    }
    if !(cutoff > 0.0 && cutoff < rate / 2.0) {
        return param(format!("cutoff {cutoff} Hz outside (0, {}) Hz", rate / 2.0));
    }
    let fc = cutoff / rate;
    let mid = (num_taps - 1) as f64 / 2.0;
    let window = hamming(num_taps);
    let mut taps: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let x = n as f64 - mid;
            let sinc = if x == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * x).sin() / (PI * x)
            };
            w * sinc
        })
        .collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    // enforce exact mirror symmetry after the normalization rounding
    for k in 0..num_taps / 2 {
        let avg = 0.5 * (taps[k] + taps[num_taps - 1 - k]);
        taps[k] = avg;
        taps[num_taps - 1 - k] = avg;
    }
    Ok(taps)
}

/// Magnitude of the FIR transfer function at `freq` Hz.
pub fn magnitude_response(taps: &[f64], freq: f64, rate: f64) -> f64 {
    let w = 2.0 * PI * freq / rate;
    let (re, im) = taps
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(re, im), (n, h)| {
            let a = w * n as f64;
            (re + h * a.cos(), im - h * a.sin())
        });
    re.hypot(im)
}

/// One-sided noise-equivalent bandwidth of a unit-DC-gain FIR, Hz.
pub fn noise_equivalent_bandwidth(taps: &[f64], rate: f64) -> f64 {
    let dc: f64 = taps.iter().sum();
    let energy: f64 = taps.iter().map(|h| h * h).sum();
    rate * energy / (2.0 * dc * dc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demod_prototype_shape() {
        let h = design_lowpass_hamming(320, 12.5e3, 4e6).unwrap();
        assert_eq!(h.len(), 320);
        let sum: f64 = h.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for k in 0..160 {
            assert_eq!(h[k], h[319 - k]);
        }
    }

    #[test]
    fn odd_length_symmetric() {
        let h = design_lowpass_hamming(101, 1e3, 48e3).unwrap();
        for k in 0..50 {
            assert_eq!(h[k], h[100 - k]);
        }
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(design_lowpass_hamming(1, 1e3, 1e4).is_err());
        assert!(design_lowpass_hamming(32, 0.0, 1e4).is_err());
        assert!(design_lowpass_hamming(32, 5e3, 1e4).is_err());
        assert!(design_lowpass_hamming(32, -1.0, 1e4).is_err());
    }

    #[test]
    fn response_at_dc_is_unity() {
        let h = design_lowpass_hamming(300, 4e3 / 3.0, 100e3).unwrap();
        assert!((magnitude_response(&h, 0.0, 100e3) - 1.0).abs() < 1e-12);
    }
}
