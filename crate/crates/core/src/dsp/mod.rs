//! Filter design and the per-sample demodulation chain.

pub mod config;
pub mod decimate;
pub mod demod;
pub mod design;
pub mod phase;
pub mod pipeline;

pub use config::{DemodConfig, ARMED_F_INT, F_INT_RANGE, F_OUT_RANGE, NOMINAL_CARRIER};
pub use decimate::{decimate_output, design_decimator, FirDecimator};
pub use demod::{build_demod_bank, default_bank, demodulate_block, Demodulator, FilterBank, IqOutput, IqSample};
pub use design::{design_lowpass_hamming, magnitude_response, noise_equivalent_bandwidth};
pub use phase::{
    extract_amplitude_phase, increments_to_frequency, unwrap_increment, wrap_phase, PhaseAmplitudeSample,
    PhaseIncrementStream,
};
pub use pipeline::{IntermediateSample, OutputSample, Pipeline};
