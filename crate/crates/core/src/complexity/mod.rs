//! Brute-force prefix complexity over the pinned machine.
//!
//! `K_s` minimizes over programs halting within `s` absolute steps; `K^t`
//! uses the budget `t(|sigma|)`; either may be relativized to an oracle.
//! Values beyond the program-length cap are reported as [`KValue::AboveCap`].

mod engine;
mod lift;
mod solovay;
mod timebound;

pub use engine::{ComplexityResult, Engine, KValue, RunTable, CSV_HEADER};
pub use lift::{lift_code, run_unbounded, Lift, LiftedProgram, LiftedRun, ReducedOracle, Reduction};
pub use solovay::{solovay_probe, SolovayReport};
pub use timebound::TimeBound;
