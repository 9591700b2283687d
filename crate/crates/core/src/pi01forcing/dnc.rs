use std::collections::BTreeMap;

use serde::Serialize;

use crate::bits::BitString;
use crate::toyvm::{diagonal_value, ProgramIndex};

/// A finite piece of a two-valued diagonally noncomputable function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dnc2Witness {
    pub values: BTreeMap<u64, bool>,
    pub stage: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dnc2Check {
    pub ok: bool,
    /// Least `e` where the value equals `phi_e(e) mod 2`.
    pub counterexample: Option<u64>,
    /// Entries whose diagonal halted within the stage.
    pub constrained: usize,
}

/// Checks `values(e) != phi_e(e) mod 2` wherever the diagonal halts within `s` steps.
pub fn is_dnc2(values: &BTreeMap<u64, bool>, s: u64) -> Dnc2Check {
    let mut constrained = 0;
    for (&e, &v) in values {
        if let Some(x) = diagonal_value(&ProgramIndex::from(e), s) {
            constrained += 1;
            if v == (x % 2 == 1) {
                return Dnc2Check {
                    ok: false,
                    counterexample: Some(e),
                    constrained,
                };
            }
        }
    }
    Dnc2Check {
        ok: true,
        counterexample: None,
        constrained,
    }
}

/// `1 - (phi_e(e) mod 2)` if the diagonal halts within `stage`, else 0.
pub fn halting_dnc(e: &ProgramIndex, stage: u64) -> bool {
    match diagonal_value(e, stage) {
        Some(x) => x % 2 == 0,
        None => false,
    }
}

/// The halting-table witness on `0..n`.
pub fn halting_dnc_table(n: u64, stage: u64) -> Dnc2Witness {
    Dnc2Witness {
        values: (0..n)
            .map(|e| (e, halting_dnc(&ProgramIndex::from(e), stage)))
            .collect(),
        stage,
    }
}

/// Reads the first `|f|` values of `f` as a map.
pub fn prefix_values(f: &BitString) -> BTreeMap<u64, bool> {
    (0..f.len()).map(|i| (i as u64, f.bit(i))).collect()
}
