//! Martingales, the Space Lemma, deficiency, the integral test and the
//! measure of oracles that make a string cheap.

mod deficiency;
mod martingale;
mod psi;
mod supermartingale;

pub use deficiency::{deficiency, DeficiencyRecord};
pub use martingale::{
    count_cheap_extensions, dyadic_family, space_lemma_length, space_lemma_violations,
    MartingaleTable, SpaceLemmaViolation,
};
pub use psi::{measure_cheap_oracles, psi, CheapMeasure, PsiContext, PsiRecord};
pub use supermartingale::{pattern_bet, FrozenMixture, StagedSupermartingale, UniversalMixture};
