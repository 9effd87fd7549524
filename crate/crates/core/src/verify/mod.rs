//! Property checks, adversarial sweeps and impossibility demonstrations.

mod check;
pub mod demos;
mod sweep;

pub use check::{approaches, check_trace, ApproachRecord, CheckOutcome, Property, TraceStats};
pub use sweep::{
    default_offsets, replay, sweep, sweep_with, FailureRecord, GraphMode, PropertyReport, PropertyTally, SweepSpec,
    SweepStats,
};
