//! Two synchronized boards on a shared fiber link.
//!
//! The run has two stages. The trigger stage simulates each board's armed
//! front end at the ADC rate to find when its acquisition starts. The
//! acquisition stage then runs the link at the intermediate rate; each
//! board sees its photodiode frequency from its own start onwards and
//! reduces it to the output rate with the output decimation filter. The
//! phase-extraction stages are linear in frequency at this level and are
//! not repeated here.

use serde::{Deserialize, Serialize};

use super::align::{align_timescales, AlignedAcquisition, SyncReport, TruthChannels};
use super::board::{ArmedFrontEnd, BoardInstance, TriggerEncoding, TriggerEvent};
use crate::control::{dds_quantize, pid_step, DdsModel, PidConfig, PidState};
use crate::dsp::{design_decimator, FirDecimator};
use crate::error::{param, Error, Result};
use crate::rng;
use crate::signal::{LinkScenario, LinkStream, Scheme};

/// Nominal frequency of the actuated AOM, Hz.
pub const DRIFT_AOM_NOMINAL: f64 = 40e6;

#[derive(Debug, Clone, PartialEq)]
pub struct SyncExperiment {
    pub board1: BoardInstance,
    pub board2: BoardInstance,
    pub scenario: LinkScenario,
    pub trigger_encoding: TriggerEncoding,
    /// Run the drift loop on board 2 (heterodyne only).
    pub drift_correction: bool,
}

/// Experiment-level settings that do not belong to a single board.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentOptions {
    pub drift_correction: bool,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions { drift_correction: true }
    }
}

impl SyncExperiment {
    pub fn new(board: BoardInstance, scenario: LinkScenario) -> Self {
        SyncExperiment {
            board1: board.clone(),
            board2: board,
            scenario,
            trigger_encoding: TriggerEncoding::default(),
            drift_correction: true,
        }
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = (&self.board1.demod, &self.board2.demod);
        if a.f_int != b.f_int || a.f_out != b.f_out {
            return param("both boards must share intermediate and output rates");
        }
        a.validate()?;
        self.scenario.validate()
    }

    /// `t1 − t2` on the common timescale: board 1 leads by this much.
    pub fn timescale_lead(&self) -> f64 {
        let (a1, a2) = trigger_arrivals(self.scenario.scheme, self.scenario.tau);
        a2 - a1
    }
}

/// When the synchronization edge reaches each board, relative to the step
/// leaving the actuated modulator.
pub fn trigger_arrivals(scheme: Scheme, tau: f64) -> (f64, f64) {
    match scheme {
        // the f_off step reaches PD1 after one pass and PD2 after the round trip
        Scheme::SelfHeterodyne => (tau, 2.0 * tau),
        // the f_drift step is local to PD2 and reaches PD1 after one pass
        Scheme::Heterodyne => (tau, 0.0),
    }
}

/// Trigger stage only: detection events for both boards.
pub fn run_trigger_stage(exp: &SyncExperiment, seed: u64) -> Result<(TriggerEvent, TriggerEvent)> {
    let fe1 = ArmedFrontEnd::new(&exp.board1)?;
    let fe2 = ArmedFrontEnd::new(&exp.board2)?;
    trigger_with(exp, &fe1, &fe2, seed)
}

fn trigger_with(
    exp: &SyncExperiment,
    fe1: &ArmedFrontEnd,
    fe2: &ArmedFrontEnd,
    seed: u64,
) -> Result<(TriggerEvent, TriggerEvent)> {
    let (a1, a2) = trigger_arrivals(exp.scenario.scheme, exp.scenario.tau);
    let step = exp.trigger_encoding.step;
    let e1 = fe1.detect(a1, step, &mut rng::derived(seed, 21))?;
    let e2 = fe2.detect(a2, step, &mut rng::derived(seed, 22))?;
    Ok((e1, e2))
}

/// Start-offset error `(start1 − start2) − (arrival1 − arrival2)` over
/// `trials` independent synchronizations.
pub fn start_offset_trials(exp: &SyncExperiment, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let fe1 = ArmedFrontEnd::new(&exp.board1)?;
    let fe2 = ArmedFrontEnd::new(&exp.board2)?;
    (0..trials as u64)
        .map(|k| {
            let (e1, e2) = trigger_with(exp, &fe1, &fe2, rng::mix(seed, k))?;
            Ok((e1.detection - e1.arrival) - (e2.detection - e2.arrival)
                + exp.board1.timescale_offset
                - exp.board2.timescale_offset)
        })
        .collect()
}

struct BoardChannel {
    start_index: u64,
    decimator: FirDecimator,
    record: Vec<f64>,
}

impl BoardChannel {
    fn push(&mut self, j: u64, x: f64) -> Option<f64> {
        if j < self.start_index {
            return None;
        }
        match self.decimator.push(x, false) {
            Some((v, false)) => {
                self.record.push(v);
                Some(v)
            }
            _ => None,
        }
    }
}

/// Full experiment: trigger, acquire for `duration` seconds, align.
pub fn run_two_board_experiment(exp: &SyncExperiment, duration: f64, seed: u64) -> Result<AlignedAcquisition> {
    exp.validate()?;
    if !(duration > 0.0) {
        return param(format!("duration must be positive, got {duration}"));
    }
    let demod = exp.board1.demod;
    let rate = demod.f_int;
    let f_out = demod.f_out;
    let scheme = exp.scenario.scheme;
    let scenario = exp.scenario.reseeded(rng::mix(seed, 10));
    let mut link = LinkStream::new(&scenario, rate)?;

    let (e1, e2) = run_trigger_stage(exp, seed)?;
    let latency = exp.trigger_encoding.start_latency;
    let start1 = e1.detection + latency + exp.board1.timescale_offset;
    let start2 = e2.detection + latency + exp.board2.timescale_offset;
    let (j1, j2) = ((start1 * rate).ceil() as u64, (start2 * rate).ceil() as u64);
    // the boards begin on the simulation grid; that rounding is part of their jitter
    let jitter1 = j1 as f64 / rate - e1.arrival;
    let jitter2 = j2 as f64 / rate - e2.arrival;

    let taps = design_decimator(&demod)?;
    let ratio = demod.output_ratio();
    let channel = |start_index| -> Result<BoardChannel> {
        Ok(BoardChannel {
            start_index,
            decimator: FirDecimator::new(&taps, ratio)?,
            record: Vec::new(),
        })
    };
    let mut b1 = channel(j1)?;
    let mut b2 = channel(j2)?;
    // truth and actuation on board 2's grid: eta, delta, rho1, rho2, drift
    let mut side = [channel(j2)?, channel(j2)?, channel(j2)?, channel(j2)?, channel(j2)?];

    let lead = exp.timescale_lead();
    let n = (duration * f_out).round() as usize;
    let shift = (lead * f_out).round() as i64;
    let need1 = n + shift.max(0) as usize;
    let need2 = n + (-shift).max(0) as usize;

    let mut pid = match (scheme, exp.drift_correction) {
        (Scheme::Heterodyne, true) => Some(PidState::new(PidConfig {
            update_rate: f_out,
            ..exp.board2.pid
        })?),
        _ => None,
    };
    let mut dds = DdsModel::default();
    let (mut word, nominal) = dds_quantize(DRIFT_AOM_NOMINAL, &mut dds)?;
    let mut actuation = 0.0;
    let mut words = Vec::new();
    let mut times = Vec::new();
    let mut outputs2 = 0u64;

    let limit = (j1.max(j2) as usize + (need1.max(need2) + 2 * taps.len()) * ratio) as u64 * 2;
    let mut j = 0u64;
    while b1.record.len() < need1 || b2.record.len() < need2 {
        if j > limit {
            return Err(Error::Experiment("acquisition did not complete".into()));
        }
        let s = link.step(actuation);
        b1.push(j, s.pd1);
        if j >= j2 && (j - j2) % ratio as u64 == ratio as u64 - 1 {
            outputs2 += 1;
        }
        let truth = [s.truth.eta, s.truth.delta, s.truth.rho1, s.truth.rho2, s.truth.drift];
        for (c, v) in side.iter_mut().zip(truth) {
            c.push(j, v);
        }
        if let Some(v) = b2.push(j, s.pd2) {
            words.push(word);
            times.push((outputs2 as f64 * ratio as f64 - 1.0) / rate);
            if let Some(p) = pid.as_mut() {
                let u = pid_step(p, v, 1.0 / f_out);
                let (w, actual) = dds_quantize(DRIFT_AOM_NOMINAL + u, &mut dds)?;
                word = w;
                actuation = actual - nominal;
            }
        }
        j += 1;
    }

    let align = align_timescales(b1.record.len(), b2.record.len(), f_out, lead, jitter1, jitter2)?;
    let len = align.len.min(n);
    let cut2 = |v: &[f64]| align.slice2(v)[..len].to_vec();
    let [eta, delta, rho1, rho2, drift] = side.map(|c| c.record);
    Ok(AlignedAcquisition {
        scheme,
        rate: f_out,
        dnu1: align.slice1(&b1.record)[..len].to_vec(),
        dnu2: cut2(&b2.record),
        f_drift_record: (scheme == Scheme::Heterodyne).then(|| cut2(&drift)),
        dds_words: Some(align.slice2(&words)[..len].to_vec()),
        common_time: cut2(&times),
        truth: Some(TruthChannels {
            eta: cut2(&eta),
            delta: cut2(&delta),
            rho1: cut2(&rho1),
            rho2: cut2(&rho2),
        }),
        sync: SyncReport {
            start1,
            start2,
            start_offset_error: (start1 - e1.arrival) - (start2 - e2.arrival),
            shift: align.shift,
            residual: align.residual,
        },
    })
}
