//! Wire frames, acquisition files, scenario files and text export.

mod config;
mod container;
mod crc;
mod export;
mod frame;

pub use config::{BoardSettings, RunSettings, ScenarioFile};
pub use container::{AcquisitionFile, AcquisitionHeader, Gap, FILE_MAGIC, FORMAT_VERSION};
pub use crc::crc32;
pub use export::{read_columns, write_columns};
pub use frame::*;
