//! Indexed partial functions `phi_e`, s-m-n, and fixed points.
//!
//! `phi_e(x)` runs the `e`-th body in length-lexicographic order with `R2 = x`
//! and reads its value from `R3` on halt.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::machine::{jump_target, run_from, RunOutcome};
use super::oracle::{NoOracle, OracleSource};
use super::program::{assemble, decode_body, Instr, Program, Reg};
use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProgramIndex(pub BigUint);

impl ProgramIndex {
    pub fn of_body(body: &BitString) -> Self {
        ProgramIndex(body.rank())
    }

    pub fn of_instrs(instrs: &[Instr]) -> Self {
        Self::of_body(&assemble(instrs))
    }

    pub fn body(&self) -> BitString {
        BitString::from_rank(&self.0)
    }

    pub fn program(&self) -> Program {
        Program::encode(&self.body())
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }
}

impl From<u64> for ProgramIndex {
    fn from(v: u64) -> Self {
        ProgramIndex(BigUint::from(v))
    }
}

impl fmt::Debug for ProgramIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Display for ProgramIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for ProgramIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhiOutcome {
    pub outcome: RunOutcome,
    /// Final `R3` when the run halted.
    pub value: Option<u64>,
}

/// Observable behaviour of `phi_e(x)` at a fixed budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Behavior {
    Value(u64),
    Diverges,
}

impl PhiOutcome {
    pub fn behavior(&self) -> Behavior {
        match self.value {
            Some(v) => Behavior::Value(v),
            None => Behavior::Diverges,
        }
    }
}

pub fn phi(e: &ProgramIndex, x: u64, oracle: &dyn OracleSource, budget: u64) -> PhiOutcome {
    phi_body(&e.body(), x, oracle, budget)
}

pub fn phi_body(body: &BitString, x: u64, oracle: &dyn OracleSource, budget: u64) -> PhiOutcome {
    let instrs = decode_body(body.bits());
    let report = run_from(&instrs, oracle, budget, [0, 0, x, 0]);
    let value = matches!(report.outcome, RunOutcome::Halted { .. }).then_some(report.state.registers[3]);
    PhiOutcome {
        outcome: report.outcome,
        value,
    }
}

/// Whether `phi_e(e)` halts within `stage` steps, without an oracle.
pub fn diagonal_halts(e: u64, stage: u64) -> bool {
    phi(&ProgramIndex::from(e), e, &NoOracle, stage).value.is_some()
}

/// `phi_e(e)` value within `stage` steps, if it halts.
pub fn diagonal_value(e: &ProgramIndex, stage: u64) -> Option<u64> {
    let x = e.to_u64()?;
    phi(e, x, &NoOracle, stage).value
}

/// Checks that every relative jump in the body lands inside it (the end counts).
pub fn validate_confined(body: &BitString) -> Result<()> {
    let instrs = decode_body(body.bits());
    for (at, i) in instrs.iter().enumerate() {
        if let Some(off) = i.jump_offset() {
            if jump_target(at + 1, off, instrs.len()).is_none() {
                return Err(Error::EscapingJump { at });
            }
        }
    }
    Ok(())
}

/// Body of `(INC R1)^y · body(e)`.
pub fn smn_body(e: &ProgramIndex, y: u64) -> Result<BitString> {
    let body = e.body();
    validate_confined(&body)?;
    let prologue = vec![Instr::Inc(Reg::R1); y as usize];
    Ok(assemble(&prologue).concat(&body))
}

/// Index of `body(e)` specialised to `R1 = y`.
pub fn smn(e: &ProgramIndex, y: u64) -> Result<ProgramIndex> {
    Ok(ProgramIndex::of_body(&smn_body(e, y)?))
}

/// Instructions that leave `R3 = v` using `R0` as scratch, by binary doubling.
pub fn load_constant(v: u64) -> Vec<Instr> {
    let mut out = Vec::new();
    if v == 0 {
        return out;
    }
    let width = 64 - v.leading_zeros();
    for i in (0..width).rev() {
        if !out.is_empty() {
            out.extend_from_slice(&double_r3());
        }
        if (v >> i) & 1 == 1 {
            out.push(Instr::Inc(Reg::R3));
        }
    }
    out
}

fn double_r3() -> [Instr; 9] {
    [
        Instr::Jz(Reg::R3, 4),
        Instr::Dec(Reg::R3),
        Instr::Inc(Reg::R0),
        Instr::Inc(Reg::R0),
        Instr::Jmp(-5),
        Instr::Jz(Reg::R0, 3),
        Instr::Dec(Reg::R0),
        Instr::Inc(Reg::R3),
        Instr::Jmp(-4),
    ]
}

/// Index of a program computing the constant function `v`.
pub fn constant_index(v: u64) -> ProgramIndex {
    let mut instrs = load_constant(v);
    instrs.push(Instr::Halt);
    ProgramIndex::of_instrs(&instrs)
}

/// Settings for the fixed-point search.
#[derive(Clone, Debug)]
pub struct FixedPointSearch {
    /// Inputs on which the two functions must agree; the candidate's own index
    /// is always added.
    pub inputs: Vec<u64>,
    pub budget: u64,
    /// Number of indices tried, starting from `start`.
    pub limit: u64,
    pub start: u64,
}

impl Default for FixedPointSearch {
    fn default() -> Self {
        Self {
            inputs: vec![0, 1, 2, 3, 7],
            budget: 2_000,
            limit: 1 << 16,
            start: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPoint {
    pub index: ProgramIndex,
    pub image: ProgramIndex,
    pub behavior_on_self: Behavior,
    pub candidates_tried: u64,
}

/// Least index `e >= start` (length-lexicographic) such that `phi_e` and
/// `phi_{t(e)}` agree on every tested input at the search budget.
pub fn fixed_point<T>(transformer: T, search: &FixedPointSearch) -> Result<FixedPoint>
where
    T: Fn(&ProgramIndex) -> ProgramIndex,
{
    fixed_point_with(transformer, search, |a, b| agree(a, b, search))
}

/// [`fixed_point`] with a caller-supplied agreement test, e.g. a memoized one.
pub fn fixed_point_with<T, A>(transformer: T, search: &FixedPointSearch, agrees: A) -> Result<FixedPoint>
where
    T: Fn(&ProgramIndex) -> ProgramIndex,
    A: Fn(&ProgramIndex, &ProgramIndex) -> bool,
{
    for k in 0..search.limit {
        let e = ProgramIndex::from(search.start + k);
        let image = transformer(&e);
        if agrees(&e, &image) {
            let self_x = e.to_u64().unwrap_or(0);
            let behavior_on_self = phi(&e, self_x, &NoOracle, search.budget).behavior();
            return Ok(FixedPoint {
                index: e,
                image,
                behavior_on_self,
                candidates_tried: k + 1,
            });
        }
    }
    Err(Error::NoFixedPoint {
        searched: search.limit,
    })
}

/// `phi_a` and `phi_b` agree on the search inputs plus `a`'s own index.
pub fn agree(a: &ProgramIndex, b: &ProgramIndex, search: &FixedPointSearch) -> bool {
    let body_a = a.body();
    let body_b = b.body();
    let own = a.to_u64();
    search
        .inputs
        .iter()
        .copied()
        .chain(own)
        .all(|x| {
            phi_body(&body_a, x, &NoOracle, search.budget).behavior()
                == phi_body(&body_b, x, &NoOracle, search.budget).behavior()
        })
}

pub fn zero_index() -> ProgramIndex {
    ProgramIndex(BigUint::zero())
}
