use serde::Serialize;

use super::dnc::{halting_dnc, is_dnc2, prefix_values, Dnc2Check};
use crate::bits::BitString;
use crate::complexity::Engine;
use crate::error::{Error, Result};
use crate::randomness::{deficiency, DeficiencyRecord};
use crate::toyvm::ProgramIndex;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JoinReport {
    pub xor: bool,
    pub x_random: bool,
    pub y_random: bool,
    pub dnc: Dnc2Check,
    pub deficiency_x: DeficiencyRecord,
    pub deficiency_y: DeficiencyRecord,
    pub k: i64,
}

impl JoinReport {
    pub fn passes(&self) -> bool {
        self.xor && self.x_random && self.y_random && self.dnc.ok
    }
}

/// `F = X xor Y`, both halves `k`-random at the stage, and `F` two-valued DNC.
pub fn join_check(
    engine: &Engine,
    f: &BitString,
    x: &BitString,
    y: &BitString,
    k: i64,
    stage: u64,
) -> Result<JoinReport> {
    for other in [x, y] {
        if other.len() != f.len() {
            return Err(Error::LengthMismatch {
                left: f.len(),
                right: other.len(),
            });
        }
    }
    let deficiency_x = deficiency(engine, x, stage, None);
    let deficiency_y = deficiency(engine, y, stage, None);
    Ok(JoinReport {
        xor: x.xor(y)? == *f,
        x_random: deficiency_x.looks_random(k),
        y_random: deficiency_y.looks_random(k),
        dnc: is_dnc2(&prefix_values(f), stage),
        deficiency_x,
        deficiency_y,
        k,
    })
}

/// Takes the least DNC string of length `len` as `F` and scans `X` in
/// lexicographic order for a pair of `k`-random halves.
pub fn find_join_triple(
    engine: &Engine,
    len: usize,
    k: i64,
    stage: u64,
) -> Option<(BitString, BitString, BitString)> {
    let f = BitString::from_bits(
        (0..len as u64)
            .map(|e| halting_dnc(&ProgramIndex::from(e), stage))
            .collect(),
    );
    BitString::all_of_length(len).find_map(|x| {
        if !deficiency(engine, &x, stage, None).looks_random(k) {
            return None;
        }
        let y = x.xor(&f).ok()?;
        deficiency(engine, &y, stage, None)
            .looks_random(k)
            .then(|| (f.clone(), x, y))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn equal_halves_give_zero_join() {
        let e = Engine::new(14);
        let x = bs("0110");
        let r = join_check(&e, &BitString::zeros(4), &x, &x, 4, 500).unwrap();
        assert!(r.xor);
        // the empty body returns 0 on every diagonal, so 0 is never DNC
        assert_eq!(r.dnc.counterexample, Some(0));
    }

    #[test]
    fn mutated_join_fails_xor() {
        let e = Engine::new(14);
        let (x, y) = (bs("0101"), bs("0011"));
        let f = x.xor(&y).unwrap();
        assert!(join_check(&e, &f, &x, &y, 4, 500).unwrap().xor);
        let g = f.xor(&bs("0010")).unwrap();
        assert!(!join_check(&e, &g, &x, &y, 4, 500).unwrap().xor);
        assert!(join_check(&e, &f, &bs("01"), &y, 4, 500).is_err());
    }
}
