//! Reference computations for the acceptance suite.
//!
//! Nothing here goes through the streaming chain: mixing uses explicit
//! trigonometric references, filtering is direct convolution, and tones
//! are generated from their phase in whole and fractional cycles.

use std::f64::consts::TAU;

/// Mix with sine/cosine references, filter every sample with `h`, then keep
/// every `ratio`-th full-window output starting at `h.len() − 1`.
///
/// Returns `(I, Q)` with `I = h ∗ (x·sin)` and `Q = h ∗ (x·cos)`.
pub fn naive_demodulate(raw: &[f64], h: &[f64], carrier: f64, rate: f64, ratio: usize) -> Vec<(f64, f64)> {
    let step = carrier / rate;
    let (mut xi, mut xq) = (Vec::with_capacity(raw.len()), Vec::with_capacity(raw.len()));
    for (m, x) in raw.iter().enumerate() {
        let arg = TAU * (m as f64 * step).fract();
        xi.push(x * arg.sin());
        xq.push(x * arg.cos());
    }
    let filter = |x: &[f64], n: usize| -> f64 { h.iter().enumerate().map(|(k, hk)| hk * x[n - k]).sum() };
    let filtered: Vec<(f64, f64)> = (h.len() - 1..raw.len()).map(|n| (filter(&xi, n), filter(&xq, n))).collect();
    filtered.into_iter().step_by(ratio).collect()
}

/// `|H(f)|` of an FIR by direct evaluation of its transfer function.
pub fn fir_gain(h: &[f64], freq: f64, rate: f64) -> f64 {
    let w = TAU * freq / rate;
    let (re, im) = h
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(re, im), (k, hk)| (re + hk * (w * k as f64).cos(), im - hk * (w * k as f64).sin()));
    re.hypot(im)
}

/// `amplitude·sin(2π·(carrier + offset)·n/rate + phase)` for samples
/// `start..start + out.len()`, where `carrier/rate` is a multiple of ¼.
///
/// The carrier contributes an exact quarter-cycle pattern and the offset
/// phase is reduced to a fractional cycle before scaling by 2π.
pub fn quarter_rate_tone(out: &mut [f64], start: u64, amplitude: f64, offset: f64, rate: f64, phase: f64) {
    let step = offset / rate;
    for (k, v) in out.iter_mut().enumerate() {
        let n = start + k as u64;
        let cycles = (n % 4) as f64 * 0.25 + (n as f64 * step).fract();
        *v = amplitude * (TAU * cycles + phase).sin();
    }
}

/// Demodulated phase PSD, relative to the input level, for phase noise
/// that is white up to the Nyquist frequency of the `f_smp = 4·nu0` ADC.
///
/// The phase is carried only by every other raw sample, so the effective
/// filter is the odd-indexed taps of `h` doubled; its autocorrelation at
/// multiples of `ratio` gives the PSD after decimation.
pub fn folded_phase_gain(h: &[f64], ratio: usize, freq: f64, f_int: f64) -> f64 {
    let g: Vec<f64> = h
        .iter()
        .enumerate()
        .map(|(k, v)| if k % 2 == 1 { 2.0 * v } else { 0.0 })
        .collect();
    let autocorr = |m: usize| -> f64 { (0..g.len() - m).map(|k| g[k] * g[k + m]).sum() };
    let mut acc = autocorr(0);
    let mut lag = 1;
    while lag * ratio < g.len() {
        acc += 2.0 * autocorr(lag * ratio) * (TAU * freq * lag as f64 / f_int).cos();
        lag += 1;
    }
    ratio as f64 * acc
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn std_dev(x: &[f64]) -> f64 {
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Remove the least-squares line.
pub fn detrend(y: &[f64]) -> Vec<f64> {
    let n = y.len() as f64;
    let tm = (n - 1.0) / 2.0;
    let ym = mean(y);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (k, v) in y.iter().enumerate() {
        let dt = k as f64 - tm;
        sxy += dt * (v - ym);
        sxx += dt * dt;
    }
    let b = sxy / sxx;
    y.iter().enumerate().map(|(k, v)| v - ym - b * (k as f64 - tm)).collect()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// Windowed-sinc low-pass (Blackman), full-window outputs only.
pub fn lowpass(x: &[f64], cutoff: f64, rate: f64, taps: usize) -> Vec<f64> {
    let fc = cutoff / rate;
    let mid = (taps - 1) as f64 / 2.0;
    let mut h: Vec<f64> = (0..taps)
        .map(|k| {
            let t = k as f64 - mid;
            let sinc = if t == 0.0 { 2.0 * fc } else { (TAU * fc * t).sin() / (std::f64::consts::PI * t) };
            let a = TAU * k as f64 / (taps - 1) as f64;
            sinc * (0.42 - 0.5 * a.cos() + 0.08 * (2.0 * a).cos())
        })
        .collect();
    let s: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= s);
    x.windows(taps).map(|w| w.iter().zip(&h).map(|(a, b)| a * b).sum()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tone_matches_direct_formula() {
        let mut out = vec![0.0; 64];
        quarter_rate_tone(&mut out, 10, 0.5, 1234.0, 4e6, 0.3);
        for (k, v) in out.iter().enumerate() {
            let t = (10 + k) as f64 / 4e6;
            let direct = 0.5 * (TAU * (1e6 + 1234.0) * t + 0.3).sin();
            assert!((v - direct).abs() < 1e-9);
        }
    }

    #[test]
    fn helpers() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]) - 0.9986).abs() < 1e-3);
        let d = detrend(&[1.0, 3.0, 5.0, 7.0]);
        assert!(d.iter().all(|v| v.abs() < 1e-12));
        assert!((fir_gain(&[0.5, 0.5], 0.0, 1.0) - 1.0).abs() < 1e-15);
        assert!(fir_gain(&[0.5, 0.5], 0.5, 1.0) < 1e-15);
        let y = lowpass(&vec![2.0; 100], 0.1, 1.0, 31);
        assert_eq!(y.len(), 70);
        assert!(y.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }
}
