//! Welch power spectral density.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::error::{param, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    /// One-sided density, (input unit)²/Hz.
    pub values: Vec<f64>,
    pub segment_length: usize,
    pub overlap: f64,
    pub window: &'static str,
    pub segments: usize,
}

impl PsdEstimate {
    /// Mean density over bins with `lo ≤ f ≤ hi`.
    pub fn band_mean(&self, lo: f64, hi: f64) -> Option<f64> {
        let (sum, n) = self
            .frequencies
            .iter()
            .zip(&self.values)
            .filter(|(f, _)| **f >= lo && **f <= hi)
            .fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    pub fn resolution(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }
}

pub fn hann(n: usize) -> Vec<f64> {
    // periodic form, the usual choice for spectral estimation
    (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos())
        .collect()
}

/// One-sided Welch estimate with Hann windows and per-segment mean removal.
pub fn welch_psd(series: &[f64], rate: f64, segment: usize, overlap: f64) -> Result<PsdEstimate> {
    if !(rate > 0.0) {
        return param(format!("rate must be positive, got {rate}"));
    }
    if segment < 2 {
        return param("segment length must be at least 2");
    }
    if !(0.0..1.0).contains(&overlap) {
        return param(format!("overlap must be in [0, 1), got {overlap}"));
    }
    if series.len() < segment {
        return Err(Error::InsufficientData {
            needed: segment,
            got: series.len(),
        });
    }
    let step = ((segment as f64 * (1.0 - overlap)).round() as usize).max(1);
    let window = hann(segment);
    let wss: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(segment);
    let bins = segment / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut buf = vec![Complex::new(0.0, 0.0); segment];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut count = 0usize;
    let mut start = 0;
    while start + segment <= series.len() {
        let seg = &series[start..start + segment];
        let mean = seg.iter().sum::<f64>() / segment as f64;
        for ((b, x), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = Complex::new((x - mean) * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        count += 1;
        start += step;
    }
    let scale = 1.0 / (rate * wss * count as f64);
    let values = acc
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let one_sided = if k == 0 || (segment % 2 == 0 && k == segment / 2) {
                1.0
            } else {
                2.0
            };
            p * scale * one_sided
        })
        .collect();
    Ok(PsdEstimate {
        frequencies: (0..bins).map(|k| k as f64 * rate / segment as f64).collect(),
        values,
        segment_length: segment,
        overlap,
        window: "hann",
        segments: count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| r.sample(StandardNormal)).collect()
    }

    #[test]
    fn zero_series() {
        let p = welch_psd(&[0.0; 1024], 10.0, 256, 0.5).unwrap();
        assert!(p.values.iter().all(|v| *v == 0.0));
        assert_eq!(p.segments, 7);
    }

    #[test]
    fn white_level() {
        let fs = 1000.0;
        let p = welch_psd(&white(1 << 18, 1), fs, 1024, 0.5).unwrap();
        let level = p.band_mean(10.0, 490.0).unwrap();
        let db = 10.0 * (level / (2.0 / fs)).log10();
        assert!(db.abs() < 0.2, "{db}");
    }

    #[test]
    fn tone_power() {
        let fs = 1000.0;
        let f0 = 123.0;
        let x: Vec<f64> = (0..1 << 16).map(|n| (2.0 * PI * f0 * n as f64 / fs).sin()).collect();
        let p = welch_psd(&x, fs, 4096, 0.5).unwrap();
        let df = p.resolution();
        let power: f64 = p
            .frequencies
            .iter()
            .zip(&p.values)
            .filter(|(f, _)| (**f - f0).abs() < 10.0 * df)
            .map(|(_, v)| v * df)
            .sum();
        assert!((power / 0.5 - 1.0).abs() < 0.05, "{power}");
    }

    #[test]
    fn scaling() {
        let x = white(1 << 14, 2);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let a = welch_psd(&x, 1.0, 512, 0.5).unwrap();
        let b = welch_psd(&y, 1.0, 512, 0.5).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((v - 9.0 * u).abs() <= 1e-9 * v.abs().max(1e-30));
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(welch_psd(&[0.0; 10], 1.0, 16, 0.5).is_err());
        assert!(welch_psd(&[0.0; 100], 1.0, 16, 1.0).is_err());
        assert!(welch_psd(&[0.0; 100], 0.0, 16, 0.5).is_err());
    }
}
