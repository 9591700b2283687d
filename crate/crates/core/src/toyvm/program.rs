//! Self-delimiting program format and the opcode table.
//!
//! A program is `header · body` where the header is the Elias-gamma code of
//! `|body| + 1`. The empty body therefore has the one-bit program `"1"`.

use std::fmt;

use num_bigint::BigUint;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Machine register, `R0..R3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reg {
    R0,
    R1,
    R2,
    R3,
}

impl Reg {
    pub fn index(self) -> usize {
        self as usize
    }

    fn from_bits(hi: bool, lo: bool) -> Reg {
        match (hi, lo) {
            (false, false) => Reg::R0,
            (false, true) => Reg::R1,
            (true, false) => Reg::R2,
            (true, true) => Reg::R3,
        }
    }

    fn bits(self) -> [bool; 2] {
        let i = self as u8;
        [i & 2 != 0, i & 1 != 0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instr {
    Halt,
    Emit0,
    Emit1,
    /// `output <- output · output`
    Double,
    Inc(Reg),
    /// Decrement, floored at zero.
    Dec(Reg),
    /// Jump by `offset` instructions relative to the next one when the register is zero.
    Jz(Reg, i8),
    Jmp(i8),
    /// Query the oracle at index `R0`, store the bit in `R1`.
    Oracle,
    /// Append `R1 mod 2` to the output.
    EmitR,
    /// Opcodes `1010..=1111`; behaves as HALT.
    Reserved(u8),
}

impl Instr {
    pub fn width(&self) -> usize {
        match self {
            Instr::Inc(_) | Instr::Dec(_) => 6,
            Instr::Jz(..) => 10,
            Instr::Jmp(_) => 8,
            _ => 4,
        }
    }

    pub fn encode_into(&self, out: &mut Vec<bool>) {
        let opcode: u8 = match self {
            Instr::Halt => 0b0000,
            Instr::Emit0 => 0b0001,
            Instr::Emit1 => 0b0010,
            Instr::Double => 0b0011,
            Instr::Inc(_) => 0b0100,
            Instr::Dec(_) => 0b0101,
            Instr::Jz(..) => 0b0110,
            Instr::Jmp(_) => 0b0111,
            Instr::Oracle => 0b1000,
            Instr::EmitR => 0b1001,
            Instr::Reserved(op) => *op,
        };
        push_nibble(out, opcode);
        match self {
            Instr::Inc(r) | Instr::Dec(r) => out.extend_from_slice(&r.bits()),
            Instr::Jz(r, off) => {
                out.extend_from_slice(&r.bits());
                push_nibble(out, (*off as u8) & 0x0f);
            }
            Instr::Jmp(off) => push_nibble(out, (*off as u8) & 0x0f),
            _ => {}
        }
    }

    pub fn jump_offset(&self) -> Option<i8> {
        match self {
            Instr::Jz(_, off) | Instr::Jmp(off) => Some(*off),
            _ => None,
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Halt => write!(f, "HALT"),
            Instr::Emit0 => write!(f, "EMIT0"),
            Instr::Emit1 => write!(f, "EMIT1"),
            Instr::Double => write!(f, "DOUBLE"),
            Instr::Inc(r) => write!(f, "INC {r:?}"),
            Instr::Dec(r) => write!(f, "DEC {r:?}"),
            Instr::Jz(r, o) => write!(f, "JZ {r:?} {o:+}"),
            Instr::Jmp(o) => write!(f, "JMP {o:+}"),
            Instr::Oracle => write!(f, "ORACLE"),
            Instr::EmitR => write!(f, "EMITR"),
            Instr::Reserved(op) => write!(f, "RESERVED {op:04b}"),
        }
    }
}

fn push_nibble(out: &mut Vec<bool>, v: u8) {
    for i in (0..4).rev() {
        out.push((v >> i) & 1 == 1);
    }
}

fn read_nibble(bits: &[bool]) -> u8 {
    bits.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8)
}

fn signed_nibble(v: u8) -> i8 {
    if v & 0x8 != 0 {
        v as i8 - 16
    } else {
        v as i8
    }
}

/// Decodes a body into its instruction list. Trailing bits that do not form a
/// complete instruction are ignored; execution reaching them halts.
pub fn decode_body(body: &[bool]) -> Vec<Instr> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos + 4 <= body.len() {
        let op = read_nibble(&body[pos..pos + 4]);
        let need = match op {
            0b0100 | 0b0101 => 6,
            0b0110 => 10,
            0b0111 => 8,
            _ => 4,
        };
        if pos + need > body.len() {
            break;
        }
        let instr = match op {
            0b0000 => Instr::Halt,
            0b0001 => Instr::Emit0,
            0b0010 => Instr::Emit1,
            0b0011 => Instr::Double,
            0b0100 => Instr::Inc(Reg::from_bits(body[pos + 4], body[pos + 5])),
            0b0101 => Instr::Dec(Reg::from_bits(body[pos + 4], body[pos + 5])),
            0b0110 => Instr::Jz(
                Reg::from_bits(body[pos + 4], body[pos + 5]),
                signed_nibble(read_nibble(&body[pos + 6..pos + 10])),
            ),
            0b0111 => Instr::Jmp(signed_nibble(read_nibble(&body[pos + 4..pos + 8]))),
            0b1000 => Instr::Oracle,
            0b1001 => Instr::EmitR,
            other => Instr::Reserved(other),
        };
        out.push(instr);
        pos += need;
    }
    out
}

/// Assembles an instruction list into body bits.
pub fn assemble(instrs: &[Instr]) -> BitString {
    let mut bits = Vec::new();
    for i in instrs {
        i.encode_into(&mut bits);
    }
    BitString::from_bits(bits)
}

/// Elias-gamma code of `m >= 1`.
pub fn elias_gamma(m: u64) -> Vec<bool> {
    assert!(m >= 1, "gamma code is defined for m >= 1");
    let width = 64 - m.leading_zeros() as usize;
    let mut out = vec![false; width - 1];
    out.extend((0..width).rev().map(|i| (m >> i) & 1 == 1));
    out
}

/// Header length for a body of `n` bits.
pub fn header_len(n: usize) -> usize {
    let m = n as u64 + 1;
    2 * (63 - m.leading_zeros() as usize) + 1
}

/// A well-formed self-delimiting program.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Program {
    bits: BitString,
    header_len: usize,
}

impl Program {
    pub fn encode(body: &BitString) -> Program {
        let mut bits = elias_gamma(body.len() as u64 + 1);
        let header_len = bits.len();
        bits.extend_from_slice(body.bits());
        Program {
            bits: BitString::from_bits(bits),
            header_len,
        }
    }

    /// Reads one program from the front of `bits`; returns it and the number of
    /// bits consumed, or `None` if `bits` ends before the program does.
    pub fn decode_prefix(bits: &[bool]) -> Option<(Program, usize)> {
        let zeros = bits.iter().take_while(|b| !**b).count();
        let header_len = 2 * zeros + 1;
        if bits.len() < header_len || zeros >= 63 {
            return None;
        }
        let m = bits[zeros..header_len]
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | b as u64);
        let n = (m - 1) as usize;
        if bits.len() < header_len + n {
            return None;
        }
        let p = Program {
            bits: BitString::from(&bits[..header_len + n]),
            header_len,
        };
        Some((p, header_len + n))
    }

    /// Parses a complete program; trailing bits are an error.
    pub fn decode(bits: &BitString) -> Result<Program> {
        match Program::decode_prefix(bits.bits()) {
            Some((p, used)) if used == bits.len() => Ok(p),
            Some(_) => Err(Error::Parse("trailing bits after program".into())),
            None => Err(Error::Parse("truncated program".into())),
        }
    }

    pub fn from_instrs(instrs: &[Instr]) -> Program {
        Program::encode(&assemble(instrs))
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn body(&self) -> BitString {
        BitString::from(&self.bits.bits()[self.header_len..])
    }

    pub fn body_bits(&self) -> &[bool] {
        &self.bits.bits()[self.header_len..]
    }

    pub fn instructions(&self) -> Vec<Instr> {
        decode_body(self.body_bits())
    }

    /// Length-lexicographic rank of the body: the program's index.
    pub fn index(&self) -> BigUint {
        self.body().rank()
    }

    pub fn from_index(index: &BigUint) -> Program {
        Program::encode(&BitString::from_rank(index))
    }

    pub fn to_hex(&self) -> String {
        self.bits.to_hex()
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Program({})", self.bits)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bits)
    }
}

/// All programs of total length at most `cap`, ordered by length then
/// lexicographically.
pub fn programs_up_to(cap: usize) -> Vec<Program> {
    let mut out = Vec::new();
    let mut n = 0usize;
    while header_len(n) <= cap {
        if header_len(n) + n <= cap {
            assert!(n < 40, "program cap {cap} too large to enumerate");
            for body in BitString::all_of_length(n) {
                out.push(Program::encode(&body));
            }
        }
        n += 1;
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.bits.cmp(&b.bits)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn gamma_codes() {
        assert_eq!(BitString::from_bits(elias_gamma(1)), bs("1"));
        assert_eq!(BitString::from_bits(elias_gamma(4)), bs("00100"));
        assert_eq!(BitString::from_bits(elias_gamma(5)), bs("00101"));
        for n in 0..300 {
            assert_eq!(header_len(n), elias_gamma(n as u64 + 1).len());
        }
    }

    #[test]
    fn encode_pins_examples() {
        assert_eq!(Program::encode(&bs("")).bits(), &bs("1"));
        assert_eq!(Program::encode(&bs("0001")).bits(), &bs("001010001"));
        assert_eq!(Program::encode(&bs("0001")).len(), 9);
    }

    #[test]
    fn exhaustive_round_trip_to_twelve_bits() {
        let mut count = 0;
        for body in BitString::all_up_to(12) {
            let p = Program::encode(&body);
            assert_eq!(p.body(), body);
            assert_eq!(Program::decode(p.bits()).unwrap(), p);
            count += 1;
        }
        assert_eq!(count, (1 << 13) - 1);
    }

    #[test]
    fn instruction_round_trip() {
        let prog = vec![
            Instr::Jz(Reg::R2, 3),
            Instr::Dec(Reg::R2),
            Instr::Inc(Reg::R0),
            Instr::Jmp(-4),
            Instr::Oracle,
            Instr::EmitR,
            Instr::Double,
            Instr::Reserved(0b1111),
        ];
        assert_eq!(decode_body(assemble(&prog).bits()), prog);
    }

    #[test]
    fn truncated_tail_is_dropped() {
        assert_eq!(decode_body(bs("0001010").bits()), vec![Instr::Emit0]);
        assert!(decode_body(bs("011").bits()).is_empty());
    }

    #[test]
    fn enumeration_is_sorted_and_complete() {
        let ps = programs_up_to(9);
        assert_eq!(ps[0].bits(), &bs("1"));
        // bodies of length 0,1,2,3,4 fit: 1 + 2 + 4 + 8 + 16
        assert_eq!(ps.len(), 31);
        assert!(ps.windows(2).all(|w| (w[0].len(), w[0].bits()) < (w[1].len(), w[1].bits())));
    }
}
