//! Software model of a microcontroller phase analyzer.
//!
//! The crate covers the complete chain of a lock-in style phase meter and
//! the environment it is deployed in:
//!
//! * [`dsp`]: FIR design, combined IQ demodulation, amplitude/phase
//!   extraction, phase unwrapping and output decimation.
//! * [`signal`]: synthetic inputs: power-law noise, beat-notes, ADC
//!   front-end, RF down-conversion and two-laser fiber-link physics.
//! * [`control`]: drift-correction PID with DDS actuator, OCXO clock model,
//!   trigger detection and resynchronization scheduling.
//! * [`link`]: two-board experiments with trigger synchronization and the
//!   noise-combination estimators for both detection schemes.
//! * [`analysis`]: Welch PSD, overlapping Allan deviation, linear fits.
//! * [`io`]: CRC-framed wire chunks, acquisition container, scenario files.
//! * [`acceptance`]: the end-to-end verification suite run by `selftest`.

pub mod acceptance;
pub mod analysis;
pub mod control;
pub mod dsp;
pub mod error;
pub mod io;
pub mod link;
pub mod signal;

pub use error::{Error, Result};

pub(crate) mod rng {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Derive an independent seed from a base seed and a stream label.
    pub fn mix(seed: u64, stream: u64) -> u64 {
        // splitmix64 finalizer keeps nearby (seed, stream) pairs decorrelated
        let mut z = seed
            .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Independent generator for `(seed, stream)`.
    pub fn derived(seed: u64, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(seed, stream))
    }
}
