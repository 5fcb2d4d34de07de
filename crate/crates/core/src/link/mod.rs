//! Two-board experiments over a fiber link and their noise combinations.

pub mod align;
pub mod board;
pub mod experiment;

pub use align::{
    align_timescales, combine_heterodyne, combine_self_heterodyne, AlignedAcquisition, Alignment, SyncReport,
    TruthChannels,
};
pub use board::{ArmedFrontEnd, BoardInstance, TriggerEncoding, TriggerEvent};
pub use experiment::{
    run_trigger_stage, run_two_board_experiment, start_offset_trials, trigger_arrivals, ExperimentOptions,
    SyncExperiment, DRIFT_AOM_NOMINAL,
};
