//! The finite-extension builder, depth profiles, and symmetric differences.

mod builder;
mod profile;

pub use builder::{
    build_deep_random, claim2_factor, claim3_fit, delta, BuilderChecks, BuilderConfig,
    BuilderTrace, RoundRecord,
};
pub use profile::{depth_profile, sgl_compare, symdiff, DepthProfile, ProfileRow, SglComparison};
