//! TOML scenario files.
//!
//! ```toml
//! [board]
//! f_int = 100e3
//! f_out = 1e3
//!
//! [link]
//! scheme = "heterodyne"
//! tau = 180e-6
//!
//! [run]
//! duration = 10.0
//! seed = 7
//! ```
//!
//! Every section and field is optional; missing values take the defaults of
//! the reference setup.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::control::{OcxoModel, PidConfig, TriggerConfig};
use crate::dsp::{DemodConfig, NOMINAL_CARRIER};
use crate::error::{Error, Result};
use crate::link::{BoardInstance, ExperimentOptions, SyncExperiment, TriggerEncoding};
use crate::signal::LinkScenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoardSettings {
    pub nu0: f64,
    pub f_int: f64,
    pub f_out: f64,
    /// Beatnote amplitude at the ADC, V.
    pub amplitude: f64,
}

impl Default for BoardSettings {
    fn default() -> Self {
        BoardSettings {
            nu0: NOMINAL_CARRIER,
            f_int: 100e3,
            f_out: 1e3,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub duration: f64,
    pub seed: u64,
    /// Samples per wire frame when writing an acquisition file.
    pub chunk: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            duration: 10.0,
            seed: 0,
            chunk: 165,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub board: BoardSettings,
    pub link: LinkScenario,
    pub trigger: TriggerConfig,
    pub encoding: TriggerEncoding,
    pub pid: PidConfig,
    pub clock1: OcxoModel,
    pub clock2: OcxoModel,
    pub experiment: ExperimentOptions,
    pub run: RunSettings,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn demod(&self) -> Result<DemodConfig> {
        DemodConfig::new(self.board.nu0, self.board.f_int, self.board.f_out)
    }

    pub fn experiment(&self) -> Result<SyncExperiment> {
        let demod = self.demod()?;
        self.link.validate()?;
        self.pid.validate()?;
        let board = |clock: OcxoModel| BoardInstance {
            clock,
            trigger: self.trigger,
            pid: self.pid,
            amplitude: self.board.amplitude,
            ..BoardInstance::new(demod)
        };
        let mut exp = SyncExperiment::new(board(self.clock1), self.link.clone());
        exp.board2 = board(self.clock2);
        exp.trigger_encoding = self.encoding;
        exp.drift_correction = self.experiment.drift_correction;
        Ok(exp)
    }

    /// SHA-256 over the canonical JSON form, hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Scheme;

    #[test]
    fn empty_file_is_default() {
        let s = ScenarioFile::parse("").unwrap();
        assert_eq!(s, ScenarioFile::default());
        let exp = s.experiment().unwrap();
        assert_eq!(exp.board1.demod.f_int, 100e3);
        assert_eq!(exp.scenario.scheme, Scheme::SelfHeterodyne);
    }

    #[test]
    fn partial_sections_and_round_trip() {
        let s = ScenarioFile::parse(
            "[board]\nf_int = 50e3\n[link]\nscheme = \"heterodyne\"\n[run]\nseed = 9\n[pid]\nactuator = \"lo\"\n",
        )
        .unwrap();
        assert_eq!(s.board.f_int, 50e3);
        assert_eq!(s.board.f_out, 1e3);
        assert_eq!(s.link.scheme, Scheme::Heterodyne);
        assert_eq!(s.run.seed, 9);
        let back = ScenarioFile::parse(&s.to_toml().unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.hash(), s.hash());
        assert_ne!(s.hash(), ScenarioFile::default().hash());
        assert_eq!(s.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ScenarioFile::parse("[bord]\n"), Err(Error::Config(_))));
        assert!(matches!(ScenarioFile::parse("[board]\nf_int = \"x\"\n"), Err(Error::Config(_))));
        let s = ScenarioFile::parse("[board]\nf_int = 30e3\n").unwrap();
        assert!(s.experiment().is_err());
    }
}
