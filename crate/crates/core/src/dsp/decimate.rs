//! Anti-aliasing FIR decimation from the intermediate to the output rate.

use super::config::DemodConfig;
use super::design::design_lowpass_hamming;
use super::phase::PhaseIncrementStream;
use crate::error::{param, Error, Result};

/// Hamming low-pass with `12·f_int/f_out` taps and cutoff `f_out/3`.
pub fn design_decimator(config: &DemodConfig) -> Result<Vec<f64>> {
    design_lowpass_hamming(config.decimation_taps(), config.decimation_cutoff(), config.f_int)
}

/// Single-channel streaming FIR decimator with zero-initialized history.
///
/// An output is produced after every `ratio` inputs. It is flagged as
/// settling while its window still covers pre-start history or any input
/// that was itself flagged as settling.
#[derive(Debug, Clone)]
pub struct FirDecimator {
    taps_rev: Vec<f64>,
    ratio: usize,
    buffer: Vec<f64>,
    consumed: u64,
    last_settling: Option<u64>,
}

const COMPACT_AT: usize = 1 << 14;

impl FirDecimator {
    pub fn new(taps: &[f64], ratio: usize) -> Result<Self> {
        if taps.is_empty() || ratio == 0 {
            return param("decimator needs taps and a nonzero ratio");
        }
        let mut buffer = Vec::with_capacity(COMPACT_AT + taps.len());
        buffer.resize(taps.len() - 1, 0.0);
        Ok(FirDecimator {
            taps_rev: taps.iter().rev().copied().collect(),
            ratio,
            buffer,
            consumed: 0,
            last_settling: None,
        })
    }

    pub fn num_taps(&self) -> usize {
        self.taps_rev.len()
    }

    /// Push one input; returns `(value, settling)` when an output is due.
    #[inline]
    pub fn push(&mut self, x: f64, settling: bool) -> Option<(f64, bool)> {
        let m = self.consumed;
        self.consumed += 1;
        self.buffer.push(x);
        if settling {
            self.last_settling = Some(m);
        }
        let n = self.taps_rev.len();
        let out = if m % self.ratio as u64 == self.ratio as u64 - 1 {
            let end = self.buffer.len();
            let acc: f64 = self.taps_rev
                .iter()
                .zip(&self.buffer[end - n..end])
                .map(|(h, v)| h * v)
                .sum();
            let pre_start = m + 1 < n as u64;
            let tainted = self.last_settling.is_some_and(|s| m < s + n as u64);
            Some((acc, pre_start || tainted))
        } else {
            None
        };
        if self.buffer.len() >= COMPACT_AT + n {
            let keep_from = self.buffer.len() - (n - 1);
            self.buffer.drain(..keep_from);
        }
        out
    }
}

/// Decimate an intermediate-rate stream to `f_out`.
///
/// Only outputs computed from full windows are returned. Increments are
/// rescaled by `f_int/f_out` so they remain phase change per output period.
pub fn decimate_output(stream: &PhaseIncrementStream, config: &DemodConfig) -> Result<PhaseIncrementStream> {
    config.validate()?;
    if (stream.rate - config.f_int).abs() > 1e-9 * config.f_int {
        return param(format!(
            "stream rate {} does not match f_int {}",
            stream.rate, config.f_int
        ));
    }
    if stream.amplitudes.len() != stream.increments.len() {
        return param("increment and amplitude channels differ in length");
    }
    let taps = design_decimator(config)?;
    decimate_with(stream, &taps, config.output_ratio(), config.f_out)
}

/// Decimation with explicit taps; exposed for filter studies.
pub fn decimate_with(
    stream: &PhaseIncrementStream,
    taps: &[f64],
    ratio: usize,
    out_rate: f64,
) -> Result<PhaseIncrementStream> {
    if (stream.rate / out_rate - ratio as f64).abs() > 1e-9 * ratio as f64 {
        return param("decimation ratio is not the rate quotient");
    }
    if stream.len() < taps.len() {
        return Err(Error::InsufficientData {
            needed: taps.len(),
            got: stream.len(),
        });
    }
    let mut inc = FirDecimator::new(taps, ratio)?;
    let mut amp = FirDecimator::new(taps, ratio)?;
    let mut out = PhaseIncrementStream {
        increments: Vec::with_capacity(stream.len() / ratio),
        amplitudes: Vec::with_capacity(stream.len() / ratio),
        rate: out_rate,
    };
    for (&d, &a) in stream.increments.iter().zip(&stream.amplitudes) {
        let i = inc.push(d, false);
        let a = amp.push(a, false);
        if let (Some((d, settling)), Some((a, _))) = (i, a) {
            if !settling {
                out.increments.push(d * ratio as f64);
                out.amplitudes.push(a);
            }
        }
    }
    Ok(out)
}
