//! Pruning schedules, two-valued DNC checks and the forcing loop.

mod dnc;
mod force;
mod join;
mod schedule;

pub use dnc::{halting_dnc, halting_dnc_table, is_dnc2, prefix_values, Dnc2Check, Dnc2Witness};
pub use force::{
    disassemble, diverging_index, force, probe_body, projection_functional, ClassDescriptor,
    ClassView, Constraint, FSource, FixedPointRecord, ForceConfig, ForcingTrace, ProbeRecord,
    ReconstructionStep, StepRecord,
};
pub use join::{find_join_triple, join_check, JoinReport};
pub use schedule::PruningSchedule;
