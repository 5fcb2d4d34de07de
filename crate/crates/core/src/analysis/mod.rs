//! Spectral and stability statistics of acquired series.

pub mod adev;
pub mod fit;
pub mod psd;

pub use adev::{octave_taus, overlapping_adev, AdevEstimate};
pub use fit::{linear_fit, LinearFit};
pub use psd::{hann, welch_psd, PsdEstimate};
