//! Overlapping Allan deviation of a frequency series.

use serde::Serialize;

use crate::error::{param, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct AdevEstimate {
    pub taus: Vec<f64>,
    /// Deviation in the unit of the input series.
    pub sigma: Vec<f64>,
    /// Number of overlapping second differences behind each point.
    pub counts: Vec<usize>,
    /// Requested taus that were dropped: not a multiple of the sample
    /// period or too long for three clusters.
    pub skipped: Vec<f64>,
}

/// Overlapping Allan deviation at the requested averaging times.
///
/// The series is integrated once into phase so each tau costs one pass.
pub fn overlapping_adev(freq: &[f64], rate: f64, taus: &[f64]) -> Result<AdevEstimate> {
    if !(rate > 0.0) {
        return param(format!("rate must be positive, got {rate}"));
    }
    let n = freq.len();
    let mean = if n > 0 { freq.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let tau0 = 1.0 / rate;
    // phase in units of (frequency × sample), mean removed for precision
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    let mut acc = 0.0;
    for y in freq {
        acc += y - mean;
        x.push(acc);
    }
    let mut sorted: Vec<f64> = taus.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    let mut out = AdevEstimate::default();
    for tau in sorted {
        let mf = tau * rate;
        let m = mf.round();
        if m < 1.0 || (mf - m).abs() > 1e-6 * mf.max(1.0) {
            out.skipped.push(tau);
            continue;
        }
        let m = m as usize;
        if n / m < 3 {
            out.skipped.push(tau);
            continue;
        }
        let terms = n + 1 - 2 * m;
        let sum: f64 = (0..terms)
            .map(|i| {
                let d = x[i + 2 * m] - 2.0 * x[i + m] + x[i];
                d * d
            })
            .sum();
        // x is in frequency·samples, so divide by m² rather than (m·τ0)²·rate²
        let var = sum / (2.0 * (m * m) as f64 * terms as f64);
        out.taus.push(m as f64 * tau0);
        out.sigma.push(var.sqrt());
        out.counts.push(terms);
    }
    Ok(out)
}

/// Octave-spaced taus from `1/rate` up to a third of the record.
pub fn octave_taus(n: usize, rate: f64) -> Vec<f64> {
    let mut taus = Vec::new();
    let mut m = 1usize;
    while m <= n / 3 {
        taus.push(m as f64 / rate);
        m *= 2;
    }
    taus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::fit::linear_fit;
    use rand::{Rng, SeedableRng};
    use rand_distr::StandardNormal;

    #[test]
    fn constant_is_zero() {
        let a = overlapping_adev(&[5.0; 1000], 10.0, &[0.1, 1.0, 10.0]).unwrap();
        assert!(a.sigma.iter().all(|s| *s == 0.0));
        assert_eq!(a.taus.len(), 3);
    }

    #[test]
    fn long_and_fractional_taus_skipped() {
        let a = overlapping_adev(&[1.0; 100], 1.0, &[1.5, 40.0, 10.0]).unwrap();
        assert_eq!(a.taus, vec![10.0]);
        assert_eq!(a.skipped, vec![1.5, 40.0]);
    }

    #[test]
    fn white_frequency_slope_and_level() {
        let rate = 100.0;
        let h0: f64 = 2.0;
        let sigma = (h0 * rate / 2.0).sqrt();
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let y: Vec<f64> = (0..400_000).map(|_| sigma * r.sample::<f64, _>(StandardNormal)).collect();
        let taus = [0.01, 0.1, 1.0, 10.0];
        let a = overlapping_adev(&y, rate, &taus).unwrap();
        for (t, s) in a.taus.iter().zip(&a.sigma) {
            let expect = (h0 / (2.0 * t)).sqrt();
            assert!((s / expect - 1.0).abs() < 0.1, "tau {t}: {s} vs {expect}");
        }
        let lx: Vec<f64> = a.taus.iter().map(|t| t.log10()).collect();
        let ly: Vec<f64> = a.sigma.iter().map(|s| s.log10()).collect();
        let fit = linear_fit(&lx, &ly).unwrap();
        assert!((fit.slope + 0.5).abs() < 0.05, "{}", fit.slope);
    }

    #[test]
    fn independent_processes_add_in_quadrature() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let a: Vec<f64> = (0..200_000).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = (0..200_000).map(|_| 2.0 * r.sample::<f64, _>(StandardNormal)).collect();
        let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let taus = [1.0, 10.0, 100.0];
        let (ea, eb, es) = (
            overlapping_adev(&a, 1.0, &taus).unwrap(),
            overlapping_adev(&b, 1.0, &taus).unwrap(),
            overlapping_adev(&s, 1.0, &taus).unwrap(),
        );
        for k in 0..3 {
            let q = (ea.sigma[k].powi(2) + eb.sigma[k].powi(2)).sqrt();
            assert!((es.sigma[k] / q - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn octaves() {
        assert_eq!(octave_taus(100, 10.0), vec![0.1, 0.2, 0.4, 0.8, 1.6, 3.2]);
    }
}
