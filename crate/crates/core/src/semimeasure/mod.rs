//! Staged universal discrete semimeasure of the pinned machine.
//!
//! `m_s(sigma)` sums `2^-|p|` over programs halting on `sigma` within `s`
//! steps, in exact rationals. Also the conversion from a computable
//! semimeasure to a stage bound and the average over random oracles.

mod average;
mod staged;
mod table;

pub use average::{
    m_relative, m_relative_all, oracle_average_closed_form, oracle_average_enumerated,
    oracle_average_monte_carlo, MonteCarlo,
};
pub use staged::{
    coding_gap, log2_rational, m_stage, m_stage_all, total_mass, CodingGap, MachineSemimeasure,
    StagedSemimeasure,
};
pub use table::{constructed_bound, semimeasure_to_timebound, ComputableSemimeasure};
