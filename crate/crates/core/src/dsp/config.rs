use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Lowest and highest supported intermediate rates, Hz.
pub const F_INT_RANGE: (f64, f64) = (10e3, 200e3);
/// Lowest and highest supported output rates, Hz.
pub const F_OUT_RANGE: (f64, f64) = (500.0, 20e3);
/// Intermediate rate used while a board is armed and waiting for a trigger.
pub const ARMED_F_INT: f64 = 200e3;
/// Nominal carrier after down-conversion.
pub const NOMINAL_CARRIER: f64 = 1e6;

/// Rates of the demodulation chain.
///
/// `f_smp` is tied to the carrier (`4·nu0`) so that half of the combined IQ
/// coefficients vanish, and the demodulation bandwidth is `f_int/8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemodConfig {
    pub nu0: f64,
    pub f_smp: f64,
    pub f_int: f64,
    pub f_out: f64,
    pub f_bw: f64,
}

fn integer_ratio(num: f64, den: f64) -> Option<usize> {
    let r = num / den;
    let k = r.round();
    if k >= 1.0 && (r - k).abs() <= 1e-9 * k {
        Some(k as usize)
    } else {
        None
    }
}

impl DemodConfig {
    /// Build a configuration for carrier `nu0`, deriving `f_smp` and `f_bw`.
    pub fn new(nu0: f64, f_int: f64, f_out: f64) -> Result<Self> {
        let cfg = DemodConfig {
            nu0,
            f_smp: 4.0 * nu0,
            f_int,
            f_out,
            f_bw: f_int / 8.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Nominal 1 MHz carrier sampled at 4 MHz.
    pub fn nominal(f_int: f64, f_out: f64) -> Result<Self> {
        Self::new(NOMINAL_CARRIER, f_int, f_out)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu0 > 0.0 && self.nu0.is_finite()) {
            return param(format!("carrier must be positive, got {}", self.nu0));
        }
        if self.f_smp != 4.0 * self.nu0 {
            return param(format!(
                "sample rate {} must equal four times the carrier {}",
                self.f_smp, self.nu0
            ));
        }
        if !(F_INT_RANGE.0..=F_INT_RANGE.1).contains(&self.f_int) {
            return param(format!("f_int {} outside supported range", self.f_int));
        }
        if !(F_OUT_RANGE.0..=F_OUT_RANGE.1).contains(&self.f_out) {
            return param(format!("f_out {} outside supported range", self.f_out));
        }
        if integer_ratio(self.f_smp, self.f_int).is_none() {
            return param(format!(
                "f_smp/f_int = {}/{} is not an integer",
                self.f_smp, self.f_int
            ));
        }
        if integer_ratio(self.f_int, self.f_out).is_none() {
            return param(format!(
                "f_int/f_out = {}/{} is not an integer",
                self.f_int, self.f_out
            ));
        }
        if (self.f_bw - self.f_int / 8.0).abs() > 1e-9 * self.f_int {
            return param("demodulation bandwidth must be f_int/8");
        }
        Ok(())
    }

    /// Input samples per intermediate sample.
    pub fn demod_ratio(&self) -> usize {
        integer_ratio(self.f_smp, self.f_int).expect("validated config")
    }

    /// Intermediate samples per output sample.
    pub fn output_ratio(&self) -> usize {
        integer_ratio(self.f_int, self.f_out).expect("validated config")
    }

    pub fn demod_taps(&self) -> usize {
        8 * self.demod_ratio()
    }

    pub fn decimation_taps(&self) -> usize {
        12 * self.output_ratio()
    }

    pub fn decimation_cutoff(&self) -> f64 {
        self.f_out / 3.0
    }

    /// The same chain switched to the armed intermediate rate.
    ///
    /// The output rate is clamped so the ratio stays an integer.
    pub fn armed(&self) -> Result<Self> {
        let f_out = if integer_ratio(ARMED_F_INT, self.f_out).is_some() {
            self.f_out
        } else {
            F_OUT_RANGE.1
        };
        Self::new(self.nu0, ARMED_F_INT, f_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_ratios() {
        let cfg = DemodConfig::nominal(100e3, 4e3).unwrap();
        assert_eq!(cfg.f_smp, 4e6);
        assert_eq!(cfg.f_bw, 12_500.0);
        assert_eq!(cfg.demod_ratio(), 40);
        assert_eq!(cfg.demod_taps(), 320);
        assert_eq!(cfg.output_ratio(), 25);
        assert_eq!(cfg.decimation_taps(), 300);
        assert!((cfg.decimation_cutoff() - 1333.333).abs() < 1e-3);
    }

    #[test]
    fn rejects_off_grid() {
        assert!(DemodConfig::nominal(300e3, 4e3).is_err());
        assert!(DemodConfig::nominal(100e3, 30e3).is_err());
        assert!(DemodConfig::nominal(100e3, 3e3).is_err());
        assert!(DemodConfig::nominal(100e3, 100.0).is_err());
        assert!(DemodConfig::nominal(30e3, 7e3).is_err());
        let mut cfg = DemodConfig::nominal(100e3, 1e3).unwrap();
        cfg.f_smp = 5e6;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn armed_switches_rate() {
        let cfg = DemodConfig::nominal(100e3, 1e3).unwrap().armed().unwrap();
        assert_eq!(cfg.f_int, 200e3);
        assert_eq!(cfg.demod_taps(), 160);
    }
}
