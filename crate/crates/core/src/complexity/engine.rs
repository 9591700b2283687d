use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::timebound::TimeBound;
use crate::bits::BitString;
use crate::scalar::{dyadic, Rational};
use crate::toyvm::{programs_up_to, run_from, Instr, Oracle, Program, RunOutcome};

/// Desk-scale complexity value; `AboveCap` sorts after every finite length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum KValue {
    Bits(usize),
    AboveCap,
}

impl KValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            KValue::Bits(n) => Some(n),
            KValue::AboveCap => None,
        }
    }
}

impl fmt::Display for KValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KValue::Bits(n) => write!(f, "{n}"),
            KValue::AboveCap => f.write_str("above-cap"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityResult {
    pub value: KValue,
    pub witness: Option<Program>,
    /// Absolute step budget the search used.
    pub budget: u64,
}

impl ComplexityResult {
    /// `sigma,budget,value,witness-hex`.
    pub fn csv_row(&self, sigma: &BitString, budget_descriptor: &str) -> String {
        let hex = self.witness.as_ref().map(Program::to_hex).unwrap_or_default();
        format!("{sigma},{},{},{hex}", csv_field(budget_descriptor), self.value)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const CSV_HEADER: &str = "sigma,budget,value,witness_hex";

/// Every program's run under one oracle at one budget.
pub struct RunTable {
    pub budget: u64,
    pub outcomes: Vec<RunOutcome>,
}

impl RunTable {
    /// Output of program `i` if it halts within `budget <= self.budget` steps.
    pub fn output_within(&self, i: usize, budget: u64) -> Option<&BitString> {
        debug_assert!(budget <= self.budget);
        match &self.outcomes[i] {
            RunOutcome::Halted { output, steps } if *steps <= budget => Some(output),
            _ => None,
        }
    }
}

/// All programs up to a length cap, with run tables memoized per oracle.
///
/// A run at budget `B` determines the outcome at every `b <= B`: the machine
/// is deterministic and the budget only cuts the run short.
pub struct Engine {
    cap: usize,
    programs: Vec<Program>,
    bodies: Vec<Vec<Instr>>,
    tables: Mutex<HashMap<Option<Oracle>, Arc<RunTable>>>,
}

impl Engine {
    pub fn new(cap: usize) -> Self {
        let programs = programs_up_to(cap);
        let bodies = programs.iter().map(Program::instructions).collect();
        Self {
            cap,
            programs,
            bodies,
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Programs in (length, lexicographic) order.
    pub fn programs(&self) -> &[Program] {
        &self.programs
    }

    pub fn bodies(&self) -> &[Vec<Instr>] {
        &self.bodies
    }

    /// A run table covering at least `budget` steps.
    pub fn table(&self, oracle: Option<&Oracle>, budget: u64) -> Arc<RunTable> {
        let key = oracle.cloned();
        if let Some(t) = self.tables.lock().unwrap().get(&key) {
            if t.budget >= budget {
                return Arc::clone(t);
            }
        }
        let outcomes = self
            .bodies
            .par_iter()
            .map(|body| run_from(body, &oracle, budget, [0; 4]).outcome)
            .collect();
        let table = Arc::new(RunTable { budget, outcomes });
        let mut tables = self.tables.lock().unwrap();
        let entry = tables.entry(key).or_insert_with(|| Arc::clone(&table));
        if entry.budget < budget {
            *entry = Arc::clone(&table);
        }
        table
    }

    /// Shortest program halting on `sigma` within `s` absolute steps.
    pub fn k_stage(&self, sigma: &BitString, s: u64, oracle: Option<&Oracle>) -> ComplexityResult {
        let table = self.table(oracle, s);
        // enumeration order makes the first hit the lexicographically least
        // among the shortest
        let hit = (0..self.programs.len()).find(|&i| table.output_within(i, s) == Some(sigma));
        match hit {
            Some(i) => ComplexityResult {
                value: KValue::Bits(self.programs[i].len()),
                witness: Some(self.programs[i].clone()),
                budget: s,
            },
            None => ComplexityResult {
                value: KValue::AboveCap,
                witness: None,
                budget: s,
            },
        }
    }

    pub fn k_time_bounded(
        &self,
        sigma: &BitString,
        t: &TimeBound,
        oracle: Option<&Oracle>,
    ) -> ComplexityResult {
        self.k_stage(sigma, t.at(sigma.len()), oracle)
    }

    /// Minimal program length for every string produced within `s` steps.
    pub fn minimal_lengths(&self, s: u64, oracle: Option<&Oracle>) -> HashMap<BitString, usize> {
        let table = self.table(oracle, s);
        let mut best = HashMap::new();
        for (i, p) in self.programs.iter().enumerate() {
            if let Some(out) = table.output_within(i, s) {
                best.entry(out.clone()).or_insert(p.len());
            }
        }
        best
    }

    /// `sum over sigma of 2^-K_s(sigma)`, exactly.
    pub fn kraft_sum(&self, s: u64, oracle: Option<&Oracle>) -> Rational {
        self.minimal_lengths(s, oracle)
            .values()
            .fold(Rational::zero(), |acc, &l| acc + dyadic(l as u32))
    }

    /// `K_s(sigma) - K_s^A(sigma)`; `None` when either side is above the cap.
    pub fn lowk_gap(&self, sigma: &BitString, a: &Oracle, s: u64) -> Option<i64> {
        let plain = self.k_stage(sigma, s, None).value.finite()?;
        let rel = self.k_stage(sigma, s, Some(a)).value.finite()?;
        Some(plain as i64 - rel as i64)
    }

    /// Checks a finite result by re-running its witness.
    pub fn verify(&self, sigma: &BitString, result: &ComplexityResult, oracle: Option<&Oracle>) -> bool {
        match &result.witness {
            Some(p) => {
                run_from(&p.instructions(), &oracle, result.budget, [0; 4])
                    .outcome
                    .halted_output()
                    == Some(sigma)
            }
            None => result.value == KValue::AboveCap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::toyvm::NoOracle;

    #[test]
    fn empty_string_has_one_bit_program() {
        let e = Engine::new(8);
        let r = e.k_time_bounded(&bs(""), &TimeBound::poly(10, 1), None);
        assert_eq!(r.value, KValue::Bits(1));
        assert_eq!(r.witness.unwrap().bits(), &bs("1"));
    }

    #[test]
    fn single_zero_at_cap_12() {
        let e = Engine::new(12);
        let r = e.k_time_bounded(&bs("0"), &TimeBound::poly(10, 1), None);
        assert_eq!(r.value, KValue::Bits(9));
        assert_eq!(r.witness.as_ref().unwrap().bits(), &bs("001010001"));
        assert!(e.verify(&bs("0"), &r, None));
    }

    #[test]
    fn brute_force_oracle_agrees() {
        let e = Engine::new(12);
        let progs = programs_up_to(12);
        for sigma in BitString::all_up_to(3) {
            let best = progs
                .iter()
                .filter(|p| {
                    crate::toyvm::run(p, &NoOracle, 50).halted_output() == Some(&sigma)
                })
                .map(Program::len)
                .min();
            assert_eq!(e.k_stage(&sigma, 50, None).value.finite(), best, "{sigma}");
        }
    }

    #[test]
    fn cap_one_is_above_cap_for_nonempty() {
        let e = Engine::new(1);
        assert_eq!(e.k_stage(&bs("1"), 100, None).value, KValue::AboveCap);
        assert_eq!(e.k_stage(&bs(""), 100, None).value, KValue::Bits(1));
    }

    #[test]
    fn zero_stage() {
        let e = Engine::new(12);
        assert_eq!(e.k_stage(&bs(""), 0, None).value, KValue::Bits(1));
        assert_eq!(e.k_stage(&bs("0"), 0, None).value, KValue::AboveCap);
    }

    #[test]
    fn smaller_budget_reuses_bigger_table() {
        let e = Engine::new(12);
        let big = e.table(None, 100);
        let small = e.table(None, 10);
        assert!(Arc::ptr_eq(&big, &small));
    }

    #[test]
    fn empty_gap_is_zero() {
        let e = Engine::new(12);
        assert_eq!(e.lowk_gap(&bs(""), &Oracle::AllZero, 100), Some(0));
    }

    #[test]
    fn kraft_at_small_cap() {
        let e = Engine::new(14);
        assert!(e.kraft_sum(200, None) <= Rational::from_integer(1.into()));
    }

    #[test]
    fn csv_row_shape() {
        let e = Engine::new(12);
        let r = e.k_stage(&bs("0"), 10, None);
        assert_eq!(r.csv_row(&bs("0"), "poly:10,1"), "0,\"poly:10,1\",9,288");
    }
}
