//! The pinned prefix-free universal oracle machine.
//!
//! Opcodes are 4 bits, big-endian:
//!
//! | bits        | instruction |
//! |-------------|-------------|
//! | `0000`      | HALT |
//! | `0001`      | EMIT0 |
//! | `0010`      | EMIT1 |
//! | `0011`      | DOUBLE (`output <- output · output`) |
//! | `0100 rr`   | INC `R[rr]` |
//! | `0101 rr`   | DEC `R[rr]` (floor 0) |
//! | `0110 rr dddd` | JZ `R[rr]`, signed offset |
//! | `0111 dddd` | JMP signed offset |
//! | `1000`      | ORACLE: `R1 <- A(R0)` |
//! | `1001`      | EMITR: append `R1 mod 2` |
//! | `1010..1111`| reserved, halts |
//!
//! Jump offsets count instructions and are relative to the following
//! instruction. Each executed instruction costs one step.

mod machine;
mod oracle;
mod program;
mod recursion;

pub use machine::{
    jump_target, run, run_from, AbortReason, MachineState, RunOutcome, RunReport, MAX_OUTPUT_BITS,
};
pub use oracle::{HaltingOracle, NoOracle, Oracle, OracleMiss, OracleSource, PartialOracle};
pub use program::{
    assemble, decode_body, elias_gamma, header_len, programs_up_to, Instr, Program, Reg,
};
pub use recursion::{
    agree, constant_index, diagonal_halts, diagonal_value, fixed_point, fixed_point_with, load_constant, phi,
    phi_body, smn, smn_body, validate_confined, zero_index, Behavior, FixedPoint,
    FixedPointSearch, PhiOutcome, ProgramIndex,
};

use crate::bits::BitString;

/// First pair `(p, q)` with `p` a proper prefix of `q`, if any.
pub fn find_prefix_pair(codes: &[&BitString]) -> Option<(BitString, BitString)> {
    let mut sorted = codes.to_vec();
    sorted.sort();
    // a string with any proper extension in the set is a prefix of its
    // immediate lexicographic successor
    sorted.windows(2).find_map(|w| {
        (w[0].len() < w[1].len() && w[0].is_prefix_of(w[1])).then(|| (w[0].clone(), w[1].clone()))
    })
}

pub fn find_program_prefix_pair(programs: &[Program]) -> Option<(BitString, BitString)> {
    let codes: Vec<&BitString> = programs.iter().map(|p| p.bits()).collect();
    find_prefix_pair(&codes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn prefix_free_up_to_fourteen_bits() {
        assert!(find_program_prefix_pair(&programs_up_to(14)).is_none());
    }

    #[test]
    fn detector_finds_planted_pair() {
        let (a, b, c) = (bs("0"), bs("011"), bs("10"));
        assert_eq!(find_prefix_pair(&[&c, &b, &a]), Some((a.clone(), b.clone())));
        assert_eq!(find_prefix_pair(&[&c, &b]), None);
        // the zero-length-body code "0" clashes with gamma codes
        assert!(bs("0").is_prefix_of(&bs("010")));
    }
}
