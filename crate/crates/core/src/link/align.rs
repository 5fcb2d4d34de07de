//! Common-timescale alignment and the noise-combination estimators.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::Scheme;

/// Result of pairing two board records on the common timescale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment {
    /// Board 1 index paired with board 2 index 0 (may be negative).
    pub shift: i64,
    pub len: usize,
    /// Remaining misalignment of board 1 relative to board 2, s.
    pub residual: f64,
}

impl Alignment {
    pub fn first1(&self) -> usize {
        self.shift.max(0) as usize
    }

    pub fn first2(&self) -> usize {
        (-self.shift).max(0) as usize
    }

    pub fn slice1<'a, T>(&self, v: &'a [T]) -> &'a [T] {
        &v[self.first1()..self.first1() + self.len]
    }

    pub fn slice2<'a, T>(&self, v: &'a [T]) -> &'a [T] {
        &v[self.first2()..self.first2() + self.len]
    }
}

/// Pair `raw1[i + k]` with `raw2[i]` so that `t = t1 − τ = t2`.
///
/// `k = round(τ·rate)`. The jitters are each board's start error with
/// respect to its nominal trigger time; they cannot be corrected and only
/// enter the reported residual.
pub fn align_timescales(
    len1: usize,
    len2: usize,
    rate: f64,
    tau: f64,
    jitter1: f64,
    jitter2: f64,
) -> Result<Alignment> {
    if !(rate > 0.0) {
        return Err(Error::Alignment(format!("rate must be positive, got {rate}")));
    }
    let shift = (tau * rate).round() as i64;
    let first1 = shift.max(0) as usize;
    let first2 = (-shift).max(0) as usize;
    let len = len1.saturating_sub(first1).min(len2.saturating_sub(first2));
    if len < 2 {
        return Err(Error::Alignment(format!(
            "records of {len1} and {len2} samples do not overlap after a {shift}-sample shift"
        )));
    }
    Ok(Alignment {
        shift,
        len,
        residual: shift as f64 / rate - tau + jitter1 - jitter2,
    })
}

/// Truth processes on board 2's timescale, filtered like the acquisitions.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TruthChannels {
    pub eta: Vec<f64>,
    pub delta: Vec<f64>,
    pub rho1: Vec<f64>,
    pub rho2: Vec<f64>,
}

/// Synchronization diagnostics of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct SyncReport {
    /// Absolute start times of the two acquisitions, s.
    pub start1: f64,
    pub start2: f64,
    /// `start1 − start2` minus its noiseless value, s.
    pub start_offset_error: f64,
    pub shift: i64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignedAcquisition {
    pub scheme: Scheme,
    pub rate: f64,
    /// Frequency deviation measured by each board, Hz.
    pub dnu1: Vec<f64>,
    pub dnu2: Vec<f64>,
    /// Drift actuation seen through the output filter, Hz.
    pub f_drift_record: Option<Vec<f64>>,
    /// Tuning word programmed at each output sample.
    pub dds_words: Option<Vec<u64>>,
    /// Board 2 local time of each sample, s.
    pub common_time: Vec<f64>,
    pub truth: Option<TruthChannels>,
    pub sync: SyncReport,
}

impl AlignedAcquisition {
    pub fn len(&self) -> usize {
        self.dnu1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dnu1.is_empty()
    }

    /// Copy with the board labels exchanged.
    pub fn swapped(&self) -> Self {
        let mut s = self.clone();
        std::mem::swap(&mut s.dnu1, &mut s.dnu2);
        s
    }
}

/// Self-heterodyne estimators: `(dnu1/2, dnu1 − dnu2)`.
pub fn combine_self_heterodyne(acq: &AlignedAcquisition) -> Result<(Vec<f64>, Vec<f64>)> {
    if acq.scheme != Scheme::SelfHeterodyne {
        return Err(Error::Usage("self-heterodyne combination on a heterodyne record".into()));
    }
    let fiber = acq.dnu1.iter().map(|d| 0.5 * d).collect();
    let residual = acq.dnu1.iter().zip(&acq.dnu2).map(|(a, b)| a - b).collect();
    Ok((fiber, residual))
}

/// Heterodyne estimators: fiber `(dnu1 + dnu2)/2` and relative laser noise
/// `(dnu1 − dnu2 − 2·Δf_drift)/2`.
pub fn combine_heterodyne(acq: &AlignedAcquisition) -> Result<(Vec<f64>, Vec<f64>)> {
    if acq.scheme != Scheme::Heterodyne {
        return Err(Error::Usage("heterodyne combination on a self-heterodyne record".into()));
    }
    let drift = acq
        .f_drift_record
        .as_ref()
        .ok_or_else(|| Error::Usage("heterodyne combination needs the drift record".into()))?;
    if drift.len() != acq.len() {
        return Err(Error::Usage("drift record length differs from the acquisitions".into()));
    }
    let fiber = acq.dnu1.iter().zip(&acq.dnu2).map(|(a, b)| 0.5 * (a + b)).collect();
    let laser = acq
        .dnu1
        .iter()
        .zip(&acq.dnu2)
        .zip(drift)
        .map(|((a, b), f)| 0.5 * (a - b - 2.0 * f))
        .collect();
    Ok((fiber, laser))
}
