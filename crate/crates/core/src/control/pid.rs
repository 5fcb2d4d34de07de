//! Drift-tracking PI(D) controller.
//!
//! The controller acts on the prefiltered frequency deviation of the
//! demodulated beatnote and returns the frequency correction to request
//! from the actuator. The integrator is clamped so the output never leaves
//! the actuator range.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::prefilter::{iir_prefilter_step, IirPrefilter};
use crate::error::{param, Result};

/// Where the correction is applied; sets the sign of the plant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Actuator {
    /// External AOM: raising its frequency lowers the measured beat.
    #[default]
    Aom,
    /// Down-conversion LO: raising it raises the measured beat.
    Lo,
}

impl Actuator {
    pub fn plant_sign(self) -> f64 {
        match self {
            Actuator::Aom => -1.0,
            Actuator::Lo => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PidConfig {
    pub kp: f64,
    /// Integral gain, 1/s.
    pub ki: f64,
    /// Derivative gain, s.
    pub kd: f64,
    pub update_rate: f64,
    /// Correction range, Hz.
    pub output_limits: (f64, f64),
    pub prefilter_cutoff: f64,
    pub actuator: Actuator,
}

/// Default integral gain, 1/s.
pub const DEFAULT_KI: f64 = 2000.0;
/// Default prefilter corner, Hz.
pub const DEFAULT_PREFILTER: f64 = 0.01;

/// Proportional gain giving a critically damped loop for a unit-gain plant
/// behind a single-pole prefilter at `cutoff`.
pub fn critical_kp(ki: f64, cutoff: f64) -> f64 {
    // s² + ωp(1+kp)s + ωp·ki has a double root when (1+kp)² = 4ki/ωp
    2.0 * (ki / (TAU * cutoff)).sqrt() - 1.0
}

impl Default for PidConfig {
    fn default() -> Self {
        PidConfig {
            kp: critical_kp(DEFAULT_KI, DEFAULT_PREFILTER),
            ki: DEFAULT_KI,
            kd: 0.0,
            update_rate: 1e3,
            output_limits: (-1e6, 1e6),
            prefilter_cutoff: DEFAULT_PREFILTER,
            actuator: Actuator::Aom,
        }
    }
}

impl PidConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.update_rate > 0.0) {
            return param(format!("PID update rate must be positive, got {}", self.update_rate));
        }
        if !(self.output_limits.0 <= self.output_limits.1) {
            return param(format!("PID limits out of order: {:?}", self.output_limits));
        }
        if [self.kp, self.ki, self.kd, self.prefilter_cutoff]
            .iter()
            .any(|g| !g.is_finite())
        {
            return param("PID gains must be finite");
        }
        Ok(())
    }

    /// All gains zero: the loop never acts.
    pub fn disabled() -> Self {
        PidConfig {
            kp: 0.0,
            ki: 0.0,
            kd: 0.0,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PidState {
    pub config: PidConfig,
    pub integral: f64,
    pub prev_error: Option<f64>,
    pub prefilter: IirPrefilter,
    pub saturated: bool,
}

impl PidState {
    pub fn new(config: PidConfig) -> Result<Self> {
        config.validate()?;
        Ok(PidState {
            integral: 0.0,
            prev_error: None,
            prefilter: IirPrefilter::new(config.prefilter_cutoff),
            saturated: false,
            config,
        })
    }
}

/// One controller update.
///
/// `error` is the measured beat deviation from its setpoint, Hz. The
/// returned correction is the actuator offset to request, Hz.
pub fn pid_step(state: &mut PidState, error: f64, dt: f64) -> f64 {
    let c = state.config;
    let e = iir_prefilter_step(&mut state.prefilter, error, dt);
    let derivative = match state.prev_error {
        Some(p) if c.kd != 0.0 => c.kd * (e - p) / dt,
        _ => 0.0,
    };
    state.prev_error = Some(e);
    // drive the beat toward zero through the plant sign
    let sign = -c.actuator.plant_sign();
    let (lo, hi) = c.output_limits;
    let candidate = state.integral + c.ki * e * dt;
    let unclamped = sign * (c.kp * e + candidate + derivative);
    if unclamped >= lo && unclamped <= hi {
        state.integral = candidate;
        state.saturated = false;
        unclamped
    } else {
        // keep the integrator at the value that just reaches the limit
        let limit = unclamped.clamp(lo, hi);
        state.integral = sign * limit - c.kp * e - derivative;
        state.saturated = true;
        limit
    }
}
