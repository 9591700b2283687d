//! Step-counted execution.

use std::collections::BTreeSet;

use serde::Serialize;

use super::oracle::{OracleMiss, OracleSource};
use super::program::{Instr, Program};
use crate::bits::BitString;

/// Output longer than this aborts the run; DOUBLE would otherwise grow it
/// exponentially in the step count.
pub const MAX_OUTPUT_BITS: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum AbortReason {
    OutOfTable(u64),
    NoOracle,
    Reduction(u64),
    OutputOverflow,
    RegisterOverflow,
}

impl From<OracleMiss> for AbortReason {
    fn from(m: OracleMiss) -> Self {
        match m {
            OracleMiss::OutOfTable(i) => AbortReason::OutOfTable(i),
            OracleMiss::NoOracle => AbortReason::NoOracle,
            OracleMiss::Reduction(i) => AbortReason::Reduction(i),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted { output: BitString, steps: u64 },
    BudgetExceeded { steps: u64 },
    Aborted { reason: AbortReason, steps: u64 },
}

impl RunOutcome {
    pub fn halted_output(&self) -> Option<&BitString> {
        match self {
            RunOutcome::Halted { output, .. } => Some(output),
            _ => None,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            RunOutcome::Halted { steps, .. }
            | RunOutcome::BudgetExceeded { steps }
            | RunOutcome::Aborted { steps, .. } => *steps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineState {
    pub registers: [u64; 4],
    pub pc: usize,
    pub output: BitString,
    pub steps: u64,
    pub queries: BTreeSet<u64>,
}

impl MachineState {
    pub fn new(registers: [u64; 4]) -> Self {
        Self {
            registers,
            pc: 0,
            output: BitString::new(),
            steps: 0,
            queries: BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub state: MachineState,
}

/// Runs `program` from all-zero registers.
pub fn run(program: &Program, oracle: &dyn OracleSource, budget: u64) -> RunOutcome {
    run_from(&program.instructions(), oracle, budget, [0; 4]).outcome
}

/// Runs a decoded body from the given initial registers.
pub fn run_from(
    instrs: &[Instr],
    oracle: &dyn OracleSource,
    budget: u64,
    registers: [u64; 4],
) -> RunReport {
    let mut st = MachineState::new(registers);
    let outcome = loop {
        let Some(instr) = instrs.get(st.pc) else {
            break halted(&st);
        };
        if st.steps >= budget {
            break RunOutcome::BudgetExceeded { steps: st.steps };
        }
        st.steps += 1;
        let next = st.pc + 1;
        match *instr {
            Instr::Halt | Instr::Reserved(_) => break halted(&st),
            Instr::Emit0 => st.output.push(false),
            Instr::Emit1 => st.output.push(true),
            Instr::EmitR => st.output.push(st.registers[1] % 2 == 1),
            Instr::Double => {
                if 2 * st.output.len() > MAX_OUTPUT_BITS {
                    break aborted(&st, AbortReason::OutputOverflow);
                }
                let copy = st.output.clone();
                st.output.extend_from(&copy);
            }
            Instr::Inc(r) => match st.registers[r.index()].checked_add(1) {
                Some(v) => st.registers[r.index()] = v,
                None => break aborted(&st, AbortReason::RegisterOverflow),
            },
            Instr::Dec(r) => {
                let v = &mut st.registers[r.index()];
                *v = v.saturating_sub(1);
            }
            Instr::Oracle => {
                let idx = st.registers[0];
                st.queries.insert(idx);
                match oracle.query(idx) {
                    Ok(b) => st.registers[1] = b as u64,
                    Err(miss) => break aborted(&st, miss.into()),
                }
            }
            Instr::Jz(r, off) => {
                if st.registers[r.index()] == 0 {
                    match jump_target(next, off, instrs.len()) {
                        Some(t) => {
                            st.pc = t;
                            continue;
                        }
                        None => break halted(&st),
                    }
                }
            }
            Instr::Jmp(off) => match jump_target(next, off, instrs.len()) {
                Some(t) => {
                    st.pc = t;
                    continue;
                }
                None => break halted(&st),
            },
        }
        st.pc = next;
    };
    RunReport { outcome, state: st }
}

/// Target of a relative jump; `None` when it leaves the body, which halts.
/// Landing exactly on the end is an ordinary fall-through halt.
pub fn jump_target(next: usize, offset: i8, len: usize) -> Option<usize> {
    let t = next as i64 + offset as i64;
    (0..=len as i64).contains(&t).then_some(t as usize)
}

fn halted(st: &MachineState) -> RunOutcome {
    RunOutcome::Halted {
        output: st.output.clone(),
        steps: st.steps,
    }
}

fn aborted(st: &MachineState, reason: AbortReason) -> RunOutcome {
    RunOutcome::Aborted {
        reason,
        steps: st.steps,
    }
}
