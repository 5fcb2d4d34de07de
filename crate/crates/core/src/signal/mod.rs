//! Synthetic inputs: noise processes, beatnotes, ADC, RF chain, fiber link.

pub mod adc;
pub mod beatnote;
pub mod link;
pub mod noise;
pub mod rf;

pub use adc::{adc_quantize, digitize_bipolar, AdcModel, AdcOutput};
pub use beatnote::{synthesize_beatnote, BeatnoteStream, ToneSpec};
pub use link::{
    link_from_processes, photodiodes, simulate_link, LinkSample, LinkScenario, LinkSeries, LinkStream, Processes,
    Scheme,
};
pub use noise::{generate_power_law_noise, white_level_from_stability, NoiseSpec, NoiseStream};
pub use rf::{mix_downconvert, Downconverted, RfChain};
