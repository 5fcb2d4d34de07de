//! First-order IIR low-pass used ahead of the drift controller.

use std::f64::consts::TAU;

/// Single-pole low-pass `y += α·(x − y)` with `α = 1 − exp(−2π·fc·dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IirPrefilter {
    pub cutoff: f64,
    pub state: f64,
}

impl IirPrefilter {
    pub fn new(cutoff: f64) -> Self {
        IirPrefilter { cutoff, state: 0.0 }
    }

    pub fn reset(&mut self, value: f64) {
        self.state = value;
    }
}

/// Advance the prefilter by `dt` seconds. A non-positive cutoff passes the
/// input through unchanged.
pub fn iir_prefilter_step(filter: &mut IirPrefilter, input: f64, dt: f64) -> f64 {
    if filter.cutoff <= 0.0 {
        filter.state = input;
        return input;
    }
    let alpha = -(-TAU * filter.cutoff * dt).exp_m1();
    filter.state += alpha * (input - filter.state);
    filter.state
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_monotonically() {
        let mut f = IirPrefilter::new(0.01);
        let mut last = 0.0;
        for _ in 0..200_000 {
            let y = iir_prefilter_step(&mut f, 3.0, 1e-3);
            assert!(y >= last && y <= 3.0);
            last = y;
        }
        assert!((last - 3.0).abs() < 1e-3);
    }

    #[test]
    fn time_constant() {
        let fc = 0.01;
        let dt = 1e-3;
        let mut f = IirPrefilter::new(fc);
        let target = 1.0 - (-1.0f64).exp();
        let mut n = 0usize;
        while iir_prefilter_step(&mut f, 1.0, dt) < target {
            n += 1;
        }
        let t = (n + 1) as f64 * dt;
        let expect = 1.0 / (TAU * fc);
        assert!((t / expect - 1.0).abs() < 0.05, "{t} vs {expect}");
    }

    #[test]
    fn attenuation_a_decade_above_cutoff() {
        let fc = 1.0;
        let dt = 1e-3;
        let f0 = 10.0 * fc;
        let mut f = IirPrefilter::new(fc);
        let mut peak: f64 = 0.0;
        for n in 0..20_000 {
            let y = iir_prefilter_step(&mut f, (TAU * f0 * n as f64 * dt).sin(), dt);
            if n > 10_000 {
                peak = peak.max(y.abs());
            }
        }
        let db = 20.0 * peak.log10();
        assert!((db + 20.0).abs() < 1.0, "{db}");
    }
}
