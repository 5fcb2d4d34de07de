//! Combined mixing + low-pass IQ demodulation.
//!
//! The reference mixing is folded into the FIR coefficients, so each IQ
//! output is a pair of dot products over the most recent `num_taps` input
//! samples. With `f_smp = 4·nu0` the references only take values in
//! `{-1, 0, 1}` and half of every coefficient set is zero; only the nonzero
//! taps are stored and accumulated.

use serde::{Deserialize, Serialize};

use super::config::DemodConfig;
use crate::error::{param, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IqSample {
    pub i: f64,
    pub q: f64,
}

/// Demodulation coefficient sets derived from a low-pass prototype.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub h_lpf: Vec<f64>,
    pub h_i: Vec<f64>,
    pub h_q: Vec<f64>,
    pub num_taps: usize,
    // (window offset, coefficient) pairs, window offset = num_taps - 1 - tap index
    i_taps: Vec<(usize, f64)>,
    q_taps: Vec<(usize, f64)>,
}

/// In-phase and quadrature references at sample `n` for `f_smp = 4·nu0`.
fn quarter_wave_refs(n: usize) -> (f64, f64) {
    match n % 4 {
        0 => (1.0, 0.0),
        1 => (0.0, 1.0),
        2 => (-1.0, 0.0),
        _ => (0.0, -1.0),
    }
}

impl FilterBank {
    /// Indices of the taps that are actually accumulated, per channel.
    pub fn nonzero_taps(&self) -> (usize, usize) {
        (self.i_taps.len(), self.q_taps.len())
    }

    fn accumulate(&self, window: &[f64]) -> (f64, f64) {
        debug_assert_eq!(window.len(), self.num_taps);
        let a = self.i_taps.iter().map(|&(k, h)| h * window[k]).sum();
        let b = self.q_taps.iter().map(|&(k, h)| h * window[k]).sum();
        (a, b)
    }
}

/// Combine a low-pass prototype with the IQ references sampled at `f_smp`.
pub fn build_demod_bank(h_lpf: &[f64], config: &DemodConfig) -> Result<FilterBank> {
    config.validate()?;
    let n = config.demod_taps();
    if h_lpf.len() != n {
        return param(format!(
            "prototype has {} taps, configuration needs {}",
            h_lpf.len(),
            n
        ));
    }
    let mut h_i = Vec::with_capacity(n);
    let mut h_q = Vec::with_capacity(n);
    for (k, &h) in h_lpf.iter().enumerate() {
        let (ri, rq) = quarter_wave_refs(k);
        h_i.push(ri * h);
        h_q.push(rq * h);
    }
    let sparse = |taps: &[f64]| -> Vec<(usize, f64)> {
        taps.iter()
            .enumerate()
            .filter(|(_, h)| **h != 0.0)
            .map(|(k, &h)| (n - 1 - k, h))
            .collect()
    };
    Ok(FilterBank {
        i_taps: sparse(&h_i),
        q_taps: sparse(&h_q),
        h_lpf: h_lpf.to_vec(),
        h_i,
        h_q,
        num_taps: n,
    })
}

/// Design the default Hamming prototype for `config` and build the bank.
pub fn default_bank(config: &DemodConfig) -> Result<FilterBank> {
    let h = super::design::design_lowpass_hamming(config.demod_taps(), config.f_bw, config.f_smp)?;
    build_demod_bank(&h, config)
}

/// Map raw bank outputs at absolute sample index `n` to (I, Q).
///
/// The bank references are anchored at the newest sample, so the pair is
/// rotated back by the carrier phase accumulated up to `n` (a multiple of a
/// quarter turn). The fixed quarter-turn offset is chosen so that an input
/// `A·sin(2π·nu0·t + φ)` yields `atan2(Q, I) = φ`.
#[inline]
fn derotate(a: f64, b: f64, n: u64) -> IqSample {
    let (x, y) = (-b, a);
    let (i, q) = match n % 4 {
        0 => (x, y),
        1 => (y, -x),
        2 => (-x, -y),
        _ => (-y, x),
    };
    IqSample { i, q }
}

/// Demodulate a standalone block whose first sample is taken as time zero.
///
/// Outputs are produced every `f_smp/f_int` samples, at sample indices
/// `num_taps - 1 + k·ratio`, each from a full filter window.
pub fn demodulate_block(raw: &[f64], bank: &FilterBank, config: &DemodConfig) -> Result<Vec<IqSample>> {
    config.validate()?;
    if bank.num_taps != config.demod_taps() {
        return param("filter bank does not match configuration");
    }
    let n_taps = bank.num_taps;
    if raw.len() < n_taps {
        return Err(Error::InsufficientData {
            needed: n_taps,
            got: raw.len(),
        });
    }
    let ratio = config.demod_ratio();
    let mut out = Vec::with_capacity((raw.len() - n_taps) / ratio + 1);
    let mut n = n_taps - 1;
    while n < raw.len() {
        let (a, b) = bank.accumulate(&raw[n + 1 - n_taps..=n]);
        out.push(derotate(a, b, n as u64));
        n += ratio;
    }
    Ok(out)
}

/// One intermediate-rate output of the streaming demodulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqOutput {
    pub iq: IqSample,
    /// Absolute index of the newest input sample in the window.
    pub sample_index: u64,
    /// The window still reaches back before the first input sample.
    pub settling: bool,
}

/// Streaming demodulator with zero-initialized history.
#[derive(Debug, Clone)]
pub struct Demodulator {
    bank: FilterBank,
    ratio: usize,
    buffer: Vec<f64>,
    consumed: u64,
}

const COMPACT_AT: usize = 1 << 16;

impl Demodulator {
    pub fn new(bank: FilterBank, config: &DemodConfig) -> Result<Self> {
        config.validate()?;
        if bank.num_taps != config.demod_taps() {
            return param("filter bank does not match configuration");
        }
        let n = bank.num_taps;
        let mut buffer = Vec::with_capacity(COMPACT_AT + n);
        buffer.resize(n - 1, 0.0);
        Ok(Demodulator {
            bank,
            ratio: config.demod_ratio(),
            buffer,
            consumed: 0,
        })
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn samples_consumed(&self) -> u64 {
        self.consumed
    }

    /// Feed raw samples; `emit` is called for every intermediate output.
    pub fn process<F: FnMut(IqOutput)>(&mut self, raw: &[f64], mut emit: F) {
        let n_taps = self.bank.num_taps;
        let ratio = self.ratio as u64;
        for &v in raw {
            self.buffer.push(v);
            let n = self.consumed;
            self.consumed += 1;
            if n % ratio == ratio - 1 {
                let end = self.buffer.len();
                let (a, b) = self.bank.accumulate(&self.buffer[end - n_taps..end]);
                emit(IqOutput {
                    iq: derotate(a, b, n),
                    sample_index: n,
                    settling: n + 1 < n_taps as u64,
                });
            }
            if self.buffer.len() >= COMPACT_AT + n_taps {
                let keep_from = self.buffer.len() - (n_taps - 1);
                self.buffer.drain(..keep_from);
            }
        }
    }
}
