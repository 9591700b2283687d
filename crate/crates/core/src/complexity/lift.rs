use std::sync::atomic::{AtomicU64, Ordering};

use super::timebound::TimeBound;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::toyvm::{run_from, Instr, OracleMiss, OracleSource, Program, Reg, RunOutcome};

/// A program computing bits of `A` from oracle `B`.
///
/// It starts with `R0 = R2 = i` and answers `A(i) = R1 mod 2` on halting.
/// `cost` is a declared step bound: index `i` must be answered within
/// `cost * (i + 1)` steps on every oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub program: Program,
    pub cost: u64,
}

impl Reduction {
    pub fn new(instrs: &[Instr], cost: u64) -> Self {
        Self {
            program: Program::from_instrs(instrs),
            cost,
        }
    }

    /// `A = B`.
    pub fn identity() -> Self {
        Self::new(&[Instr::Oracle], 1)
    }

    /// `A(i) = 1 - B(i)`.
    pub fn complement() -> Self {
        Self::new(
            &[
                Instr::Oracle,
                Instr::Jz(Reg::R1, 2),
                Instr::Dec(Reg::R1),
                Instr::Halt,
                Instr::Inc(Reg::R1),
            ],
            4,
        )
    }

    /// `A(i) = B(2i)`: doubles `R0` through `R2`, then queries.
    pub fn even_bits() -> Self {
        Self::new(
            &[
                Instr::Jz(Reg::R2, 3),
                Instr::Dec(Reg::R2),
                Instr::Inc(Reg::R0),
                Instr::Jmp(-4),
                Instr::Oracle,
            ],
            4,
        )
    }

    /// Step bound for index `i`.
    pub fn budget_for(&self, i: u64) -> u64 {
        self.cost.saturating_mul(i.saturating_add(1))
    }

    /// Runs the reduction once; `None` if it does not halt within `budget`.
    pub fn answer(&self, i: u64, base: &dyn OracleSource, budget: u64) -> Option<(bool, u64)> {
        let report = run_from(&self.program.instructions(), base, budget, [i, 0, i, 0]);
        match report.outcome {
            RunOutcome::Halted { steps, .. } => Some((report.state.registers[1] % 2 == 1, steps)),
            _ => None,
        }
    }

    /// Checks the declared cost on indices `0..n` under `base`.
    pub fn check_cost(&self, base: &dyn OracleSource, n: u64) -> bool {
        (0..n).all(|i| self.answer(i, base, self.budget_for(i)).is_some())
    }
}

/// Oracle `A` simulated through a reduction to `B`, with step accounting.
pub struct ReducedOracle<'a> {
    reduction: &'a Reduction,
    instrs: Vec<Instr>,
    base: &'a dyn OracleSource,
    /// Per-query budget; `None` means the declared cost bound.
    fixed_budget: Option<u64>,
    steps: AtomicU64,
    max_index: AtomicU64,
    queries: AtomicU64,
}

impl<'a> ReducedOracle<'a> {
    pub fn new(reduction: &'a Reduction, base: &'a dyn OracleSource, fixed_budget: Option<u64>) -> Self {
        Self {
            reduction,
            instrs: reduction.program.instructions(),
            base,
            fixed_budget,
            steps: AtomicU64::new(0),
            max_index: AtomicU64::new(0),
            queries: AtomicU64::new(0),
        }
    }

    pub fn reduction_steps(&self) -> u64 {
        self.steps.load(Ordering::Relaxed)
    }

    pub fn max_index(&self) -> Option<u64> {
        (self.queries.load(Ordering::Relaxed) > 0).then(|| self.max_index.load(Ordering::Relaxed))
    }
}

impl OracleSource for ReducedOracle<'_> {
    fn query(&self, index: u64) -> std::result::Result<bool, OracleMiss> {
        let budget = self
            .fixed_budget
            .unwrap_or_else(|| self.reduction.budget_for(index));
        let report = run_from(&self.instrs, self.base, budget, [index, 0, index, 0]);
        self.queries.fetch_add(1, Ordering::Relaxed);
        self.max_index.fetch_max(index, Ordering::Relaxed);
        self.steps.fetch_add(report.outcome.steps(), Ordering::Relaxed);
        match report.outcome {
            RunOutcome::Halted { .. } => Ok(report.state.registers[1] % 2 == 1),
            RunOutcome::Aborted { .. } | RunOutcome::BudgetExceeded { .. } => {
                Err(OracleMiss::Reduction(index))
            }
        }
    }
}

/// `reduction ++ inner`: the machine-level wrapper. Its length overhead is
/// the reduction's code length, independent of `inner`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedProgram {
    pub reduction: Reduction,
    pub inner: Program,
}

impl LiftedProgram {
    pub fn bits(&self) -> BitString {
        self.reduction.program.bits().concat(self.inner.bits())
    }

    pub fn len(&self) -> usize {
        self.overhead() + self.inner.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn overhead(&self) -> usize {
        self.reduction.program.len()
    }

    /// Splits a lifted code back into its two self-delimiting parts.
    pub fn decode(bits: &BitString, cost: u64) -> Result<LiftedProgram> {
        let (red, used) = Program::decode_prefix(bits.bits())
            .ok_or_else(|| Error::Parse("truncated reduction header".into()))?;
        let inner = Program::decode(&BitString::from_bits(bits.bits()[used..].to_vec()))?;
        Ok(LiftedProgram {
            reduction: Reduction { program: red, cost },
            inner,
        })
    }

    /// Runs `inner` with every ORACLE query answered by the reduction on
    /// `base`. Inner steps are capped by `inner_budget`; each reduction call
    /// by its declared cost, or by `per_query` when given.
    pub fn run(
        &self,
        base: &dyn OracleSource,
        inner_budget: u64,
        per_query: Option<u64>,
    ) -> LiftedRun {
        let reduced = ReducedOracle::new(&self.reduction, base, per_query);
        let outcome = run_from(&self.inner.instructions(), &reduced, inner_budget, [0; 4]).outcome;
        let reduction_steps = reduced.reduction_steps();
        LiftedRun {
            total_steps: outcome.steps() + reduction_steps,
            outcome,
            reduction_steps,
            max_index: reduced.max_index(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedRun {
    pub outcome: RunOutcome,
    pub reduction_steps: u64,
    pub total_steps: u64,
    pub max_index: Option<u64>,
}

/// The lifted program and, in the bounded case, the bound it runs within.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lift {
    pub program: LiftedProgram,
    pub t_prime: Option<TimeBound>,
}

/// Wraps `tau` so that it runs relative to `B` through `reduction`.
///
/// With a time bound, `t'(n) = t(n) * (1 + c * (t(n) + 1))`: at most `t(n)`
/// queries, each at an index `<= t(n)` since `R0` grows by one per step.
pub fn lift_code(tau: &Program, reduction: &Reduction, t: Option<&TimeBound>) -> Lift {
    Lift {
        program: LiftedProgram {
            reduction: reduction.clone(),
            inner: tau.clone(),
        },
        t_prime: t.map(|t| TimeBound::Lifted {
            base: Box::new(t.clone()),
            cost: reduction.cost,
        }),
    }
}

/// Runs a lifted program in the unbounded case: reduction calls get
/// `global_budget` each and a divergent call aborts.
pub fn run_unbounded(
    lifted: &LiftedProgram,
    base: &dyn OracleSource,
    global_budget: u64,
) -> Result<BitString> {
    let r = lifted.run(base, global_budget, Some(global_budget));
    match r.outcome {
        RunOutcome::Halted { output, .. } => Ok(output),
        RunOutcome::Aborted { steps, .. } => Err(Error::Invariant(format!(
            "lifted run aborted after {steps} steps"
        ))),
        RunOutcome::BudgetExceeded { .. } => Err(Error::BudgetInconclusive(format!(
            "no halt within {global_budget} steps"
        ))),
    }
}
