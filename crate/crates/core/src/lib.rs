//! Desk-scale workbench for time-bounded prefix complexity and relativized depth.
//!
//! Everything runs on one pinned prefix-free oracle machine ([`toyvm`]). On top
//! of it sit brute-force complexity ([`complexity`]), staged semimeasures
//! ([`semimeasure`]), martingales and integral tests ([`randomness`]), the
//! finite-extension builder and depth profiles ([`constructions`]), and the
//! forcing loop over pruning schedules ([`pi01forcing`]).

pub mod bits;
pub mod complexity;
pub mod constructions;
pub mod error;
pub mod io;
pub mod pi01forcing;
pub mod randomness;
pub mod scalar;
pub mod semimeasure;
pub mod toyvm;

pub use bits::BitString;
pub use error::{Error, Result};
pub use scalar::{Rational, Scalar};

/// Martingale tables over exact rationals.
pub type ExactMartingale = randomness::MartingaleTable<Rational>;
/// Martingale tables over floats, for quick sweeps.
pub type FloatMartingale = randomness::MartingaleTable<f64>;
