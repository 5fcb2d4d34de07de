//! Drift correction, actuator quantization, trigger detection and timing.

pub mod clock;
pub mod dds;
pub mod pid;
pub mod prefilter;
pub mod trigger;

pub use clock::{
    apply_resync, clock_advance, drift_horizon, schedule_resync, ClockState, OcxoModel, ResyncEvent, SyncState,
    RESYNC_CAP, RESYNC_LATENCY,
};
pub use dds::{dds_quantize, DdsModel};
pub use pid::{critical_kp, pid_step, Actuator, PidConfig, PidState};
pub use prefilter::{iir_prefilter_step, IirPrefilter};
pub use trigger::{detect_trigger, Edge, TriggerChannel, TriggerConfig};
