use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use serde::Serialize;

use super::dnc::halting_dnc;
use super::schedule::PruningSchedule;
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::toyvm::{
    agree, constant_index, decode_body, fixed_point_with, phi, run_from, AbortReason, Behavior,
    FixedPointSearch, Instr, NoOracle, PartialOracle, ProgramIndex, Reg, RunOutcome,
};

/// `Phi^X(e) = X(e)`: moves `R2` into `R0`, queries, copies the answer to `R3`.
pub fn projection_functional() -> Vec<Instr> {
    vec![
        Instr::Jz(Reg::R2, 3),
        Instr::Dec(Reg::R2),
        Instr::Inc(Reg::R0),
        Instr::Jmp(-4),
        Instr::Oracle,
        Instr::Jz(Reg::R1, 1),
        Instr::Inc(Reg::R3),
    ]
}

/// Returns 0 when `R1 = 0`, 1 when `R1 = 1`, and loops otherwise; `s-m-n`
/// on this body with the emptiness verdict gives the probe `n_s`.
pub fn probe_body() -> Vec<Instr> {
    vec![
        Instr::Jz(Reg::R1, 3),
        Instr::Dec(Reg::R1),
        Instr::Jz(Reg::R1, 2),
        Instr::Jmp(-1),
        Instr::Halt,
        Instr::Inc(Reg::R3),
        Instr::Halt,
    ]
}

pub fn diverging_index() -> ProgramIndex {
    ProgramIndex::of_instrs(&[Instr::Jmp(-1)])
}

pub fn disassemble(e: &ProgramIndex) -> Vec<String> {
    decode_body(e.body().bits()).iter().map(ToString::to_string).collect()
}

/// Source of the diagonally noncomputable values used for extensions.
#[derive(Clone, Debug)]
pub enum FSource {
    /// `1 - phi_e(e) mod 2` where the diagonal halts within the stage, else 0.
    HaltingDnc { stage: u64 },
    Table(BTreeMap<u64, bool>),
}

impl FSource {
    pub fn value(&self, e: &ProgramIndex) -> Result<bool> {
        match self {
            FSource::HaltingDnc { stage } => Ok(halting_dnc(e, *stage)),
            FSource::Table(t) => e
                .to_u64()
                .and_then(|i| t.get(&i).copied())
                .ok_or_else(|| Error::Precondition(format!("f undefined at {e}"))),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            FSource::HaltingDnc { stage } => format!("halting-dnc:{stage}"),
            FSource::Table(t) => format!("table:{}", t.len()),
        }
    }
}

/// `Phi^X(m) = value`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Constraint {
    pub m: u64,
    pub value: bool,
}

/// `C_s = C ∩ [sigma] ∩ {X : Phi^X(m_j) = a_j for each constraint}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassDescriptor {
    pub stage: u64,
    pub sigma: BitString,
    pub constraints: Vec<Constraint>,
}

enum Probe {
    Value(bool),
    Query(u64),
}

/// Exact emptiness tests for a clopen schedule refined by functional
/// constraints: backtracks over the functional's query trees, then over the
/// free bits below the deepest forbidden string.
pub struct ClassView<'a> {
    forbidden: Vec<BitString>,
    depth: usize,
    phi: &'a [Instr],
    budget: u64,
}

impl<'a> ClassView<'a> {
    pub fn new(schedule: &PruningSchedule, stage: u64, phi: &'a [Instr], budget: u64) -> Self {
        let forbidden: Vec<BitString> = schedule.forbidden_at(stage).into_iter().collect();
        let depth = forbidden.iter().map(BitString::len).max().unwrap_or(0);
        Self {
            forbidden,
            depth,
            phi,
            budget,
        }
    }

    fn probe(&self, p: &PartialOracle, e: u64) -> Result<Probe> {
        let report = run_from(self.phi, p, self.budget, [0, 0, e, 0]);
        match report.outcome {
            RunOutcome::Halted { .. } => Ok(Probe::Value(report.state.registers[3] % 2 == 1)),
            RunOutcome::Aborted {
                reason: AbortReason::OutOfTable(i),
                ..
            } => Ok(Probe::Query(i)),
            RunOutcome::BudgetExceeded { .. } => Err(Error::BudgetInconclusive(format!(
                "functional on input {e} not settled within {} steps",
                self.budget
            ))),
            RunOutcome::Aborted { reason, .. } => Err(Error::Precondition(format!(
                "functional aborted on input {e}: {reason:?}"
            ))),
        }
    }

    /// `Phi^X(e)` for `X` extending the prefix, if determined by it.
    pub fn value_on(&self, prefix: &BitString, e: u64) -> Result<Option<bool>> {
        match self.probe(&assignment(prefix), e)? {
            Probe::Value(v) => Ok(Some(v)),
            Probe::Query(_) => Ok(None),
        }
    }

    pub fn nonempty(&self, sigma: &BitString, constraints: &[Constraint]) -> Result<bool> {
        self.search(&mut assignment(sigma), constraints)
    }

    fn search(&self, p: &mut PartialOracle, rest: &[Constraint]) -> Result<bool> {
        let Some((c, tail)) = rest.split_first() else {
            return Ok(self.completes(p, &mut Vec::new()));
        };
        match self.probe(p, c.m)? {
            Probe::Value(v) => {
                if v == c.value {
                    self.search(p, tail)
                } else {
                    Ok(false)
                }
            }
            Probe::Query(i) => {
                for b in [false, true] {
                    p.bits.insert(i, b);
                    let found = self.search(p, rest);
                    p.bits.remove(&i);
                    if found? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn completes(&self, p: &PartialOracle, prefix: &mut Vec<bool>) -> bool {
        let n = prefix.len();
        if self
            .forbidden
            .iter()
            .any(|w| w.len() == n && w.bits() == &prefix[..])
        {
            return false;
        }
        if n == self.depth {
            return true;
        }
        for b in [false, true] {
            if p.bits.get(&(n as u64)).is_some_and(|&v| v != b) {
                continue;
            }
            prefix.push(b);
            let ok = self.completes(p, prefix);
            prefix.pop();
            if ok {
                return true;
            }
        }
        false
    }
}

fn assignment(sigma: &BitString) -> PartialOracle {
    PartialOracle {
        bits: (0..sigma.len()).map(|i| (i as u64, sigma.bit(i))).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct ForceConfig {
    pub schedule: PruningSchedule,
    /// Total oracle program; its value is `R3 mod 2`.
    pub phi: Vec<Instr>,
    pub f: FSource,
    /// Values for the `m_s` constraints; when absent `f(s)` is used.
    pub a: Option<BitString>,
    pub steps: usize,
    /// Schedule stage and step budget for every run of the functional.
    pub stage_budget: u64,
    pub search: FixedPointSearch,
}

impl ForceConfig {
    pub fn new(schedule: PruningSchedule, f: FSource, steps: usize, stage_budget: u64) -> Self {
        Self {
            schedule,
            phi: projection_functional(),
            f,
            a: None,
            steps,
            stage_budget,
            search: FixedPointSearch::default(),
        }
    }

    /// Fixed-point searches start past every bit the prefixes or the schedule fix.
    pub fn working_depth(&self) -> u64 {
        self.steps.max(self.schedule.max_forbidden_len()) as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeRecord {
    pub index: ProgramIndex,
    /// 0 or 1: that branch below `sigma_s` is empty; 2: neither is.
    pub verdict: u8,
    pub on_self: Behavior,
    pub disassembly: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixedPointRecord {
    pub index: u64,
    pub image: ProgramIndex,
    pub on_self: Behavior,
    pub candidates_tried: u64,
    pub disassembly: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub s: usize,
    pub class: ClassDescriptor,
    pub probe: ProbeRecord,
    pub f_value: bool,
    pub sigma_next: BitString,
    pub m: FixedPointRecord,
    pub a_value: bool,
    pub emptiness_stage: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReconstructionStep {
    pub s: usize,
    /// Constraint histories consistent with the prefix at this step.
    pub branches: usize,
    pub probe_candidates: Vec<ProgramIndex>,
    /// `f(n_s)`, read off as bit `s` of the prefix.
    pub f_value: bool,
    pub f_recovered: bool,
    /// `Phi^B(m_s)` when the prefix determines it.
    pub a_value: Option<bool>,
    pub a_beyond_prefix: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForcingTrace {
    pub steps: Vec<StepRecord>,
    pub b_prefix: BitString,
    /// Some member of `C_N` extends the prefix.
    pub b_member: bool,
    pub nested: bool,
    pub self_reference: bool,
    pub reconstruction: Vec<ReconstructionStep>,
    pub reconstruction_ok: bool,
    pub functional: Vec<String>,
    pub f: String,
    pub stage_budget: u64,
}

struct Stepper<'a> {
    cfg: &'a ForceConfig,
    view: ClassView<'a>,
    probe: ProgramIndex,
    images: [ProgramIndex; 3],
    agree_memo: Mutex<HashMap<(u64, usize), bool>>,
}

impl<'a> Stepper<'a> {
    fn new(cfg: &'a ForceConfig) -> Self {
        Self {
            cfg,
            view: ClassView::new(&cfg.schedule, cfg.stage_budget, &cfg.phi, cfg.stage_budget),
            probe: ProgramIndex::of_instrs(&probe_body()),
            images: [constant_index(0), constant_index(1), diverging_index()],
            agree_memo: Mutex::new(HashMap::new()),
        }
    }

    fn probe_for(&self, sigma: &BitString, constraints: &[Constraint]) -> Result<(u8, ProgramIndex)> {
        let verdict = if !self.view.nonempty(&sigma.with_bit(false), constraints)? {
            0
        } else if !self.view.nonempty(&sigma.with_bit(true), constraints)? {
            1
        } else {
            2
        };
        Ok((verdict, crate::toyvm::smn(&self.probe, verdict as u64)?))
    }

    fn agrees(&self, e: &ProgramIndex, image: usize) -> bool {
        let Some(x) = e.to_u64() else {
            return agree(e, &self.images[image], &self.cfg.search);
        };
        if let Some(&v) = self.agree_memo.lock().unwrap().get(&(x, image)) {
            return v;
        }
        let v = agree(e, &self.images[image], &self.cfg.search);
        self.agree_memo.lock().unwrap().insert((x, image), v);
        v
    }

    /// `T(e)`: returns `i` if `Phi^X(e) = i` throughout the class, else diverges.
    fn transform(&self, sigma: &BitString, constraints: &[Constraint], x: u64) -> Result<usize> {
        let mut possible = [false; 2];
        for (v, slot) in possible.iter_mut().enumerate() {
            let mut cs = constraints.to_vec();
            cs.push(Constraint { m: x, value: v == 1 });
            *slot = self.view.nonempty(sigma, &cs)?;
        }
        Ok(match possible {
            [true, false] => 0,
            [false, true] => 1,
            _ => 2,
        })
    }

    fn fixed_m(&self, sigma: &BitString, constraints: &[Constraint], start: u64) -> Result<FixedPointRecord> {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let image_of = |e: &ProgramIndex| -> usize {
            // the class is only consulted for candidates matching some image
            if failure.borrow().is_some() || !(0..3).any(|i| self.agrees(e, i)) {
                return 2;
            }
            let x = e.to_u64().expect("agreeing candidates are small");
            match self.transform(sigma, constraints, x) {
                Ok(i) => i,
                Err(err) => {
                    *failure.borrow_mut() = Some(err);
                    2
                }
            }
        };
        let search = FixedPointSearch {
            start,
            ..self.cfg.search.clone()
        };
        let fp = fixed_point_with(
            |e| self.images[image_of(e)].clone(),
            &search,
            |e, img| {
                let i = self.images.iter().position(|x| x == img).expect("known image");
                self.agrees(e, i)
            },
        )?;
        if let Some(err) = failure.into_inner() {
            return Err(err);
        }
        Ok(FixedPointRecord {
            index: fp.index.to_u64().expect("searched indices fit"),
            disassembly: disassemble(&fp.index),
            image: fp.image,
            on_self: fp.behavior_on_self,
            candidates_tried: fp.candidates_tried,
        })
    }

    fn start_after(&self, constraints: &[Constraint]) -> u64 {
        let last = constraints.last().map_or(0, |c| c.m + 1);
        last.max(self.cfg.working_depth())
    }
}

fn at_step(step: usize, e: Error) -> Error {
    match e {
        Error::BudgetInconclusive(m) => Error::BudgetInconclusive(format!("step {step}: {m}")),
        Error::Precondition(m) => Error::Precondition(format!("step {step}: {m}")),
        other => other,
    }
}

/// Runs `steps` rounds of the forcing loop and replays them from the emitted prefix.
pub fn force(cfg: &ForceConfig) -> Result<ForcingTrace> {
    let st = Stepper::new(cfg);
    if !st.view.nonempty(&BitString::new(), &[])? {
        return Err(Error::Precondition("the class is empty".into()));
    }
    let mut sigma = BitString::new();
    let mut constraints: Vec<Constraint> = Vec::new();
    let mut steps = Vec::with_capacity(cfg.steps);
    let mut self_reference = true;
    for s in 0..cfg.steps {
        let (verdict, n) = st.probe_for(&sigma, &constraints).map_err(|e| at_step(s, e))?;
        let self_x = n.to_u64().ok_or_else(|| Error::IndexTooLarge(n.to_string()))?;
        let on_self = phi(&n, self_x, &NoOracle, cfg.stage_budget).behavior();
        self_reference &= on_self
            == match verdict {
                2 => Behavior::Diverges,
                v => Behavior::Value(v as u64),
            };
        let f_value = cfg.f.value(&n).map_err(|e| at_step(s, e))?;
        let next = sigma.with_bit(f_value);
        if !st.view.nonempty(&next, &constraints).map_err(|e| at_step(s, e))? {
            return Err(at_step(
                s,
                Error::Precondition(format!("f({n}) = {} enters an empty branch", f_value as u8)),
            ));
        }
        let m = st
            .fixed_m(&next, &constraints, st.start_after(&constraints))
            .map_err(|e| at_step(s, e))?;
        self_reference &= m.on_self
            == match st.images.iter().position(|x| *x == m.image) {
                Some(2) | None => Behavior::Diverges,
                Some(i) => Behavior::Value(i as u64),
            };
        let a_value = match &cfg.a {
            Some(a) => a
                .get(s)
                .ok_or_else(|| at_step(s, Error::Precondition(format!("A-prefix shorter than {}", s + 1))))?,
            None => cfg.f.value(&ProgramIndex::from(s as u64))?,
        };
        let class = ClassDescriptor {
            stage: cfg.stage_budget,
            sigma: sigma.clone(),
            constraints: constraints.clone(),
        };
        constraints.push(Constraint { m: m.index, value: a_value });
        if !st.view.nonempty(&next, &constraints).map_err(|e| at_step(s, e))? {
            return Err(at_step(
                s,
                Error::Precondition(format!(
                    "the functional is constant on the class at {}, so it is not DNC there",
                    m.index
                )),
            ));
        }
        steps.push(StepRecord {
            s,
            class,
            probe: ProbeRecord {
                disassembly: disassemble(&n),
                index: n,
                verdict,
                on_self,
            },
            f_value,
            sigma_next: next.clone(),
            m,
            a_value,
            emptiness_stage: cfg.stage_budget,
        });
        sigma = next;
    }
    let b_member = st.view.nonempty(&sigma, &constraints)?;
    let nested = steps.windows(2).all(|w| {
        w[0].class.sigma.is_prefix_of(&w[1].class.sigma)
            && w[1].class.constraints.starts_with(&w[0].class.constraints)
    }) && steps.iter().enumerate().all(|(s, r)| r.class.sigma.len() == s);
    let reconstruction = reconstruct(&st, &sigma)?;
    let reconstruction_ok = reconstruction.iter().zip(&steps).all(|(r, t)| {
        r.f_recovered && r.f_value == t.f_value && r.a_value.is_none_or(|a| a == t.a_value)
    });
    Ok(ForcingTrace {
        steps,
        b_prefix: sigma,
        b_member,
        nested,
        self_reference,
        reconstruction,
        reconstruction_ok,
        functional: cfg.phi.iter().map(ToString::to_string).collect(),
        f: cfg.f.descriptor(),
        stage_budget: cfg.stage_budget,
    })
}

/// Replays the loop from the prefix alone, branching on every constraint
/// value the prefix leaves undetermined.
fn reconstruct(st: &Stepper<'_>, b: &BitString) -> Result<Vec<ReconstructionStep>> {
    let mut histories: BTreeSet<Vec<Constraint>> = BTreeSet::from([Vec::new()]);
    let mut out = Vec::with_capacity(b.len());
    for s in 0..b.len() {
        let sigma = b.prefix(s);
        let next = b.prefix(s + 1);
        let mut probes = BTreeSet::new();
        let mut values = BTreeSet::new();
        let mut beyond = false;
        let mut successors = BTreeSet::new();
        for h in &histories {
            let (_, n) = st.probe_for(&sigma, h)?;
            probes.insert(n);
            let m = st.fixed_m(&next, h, st.start_after(h))?.index;
            let determined = st.view.value_on(b, m)?;
            beyond |= determined.is_none();
            let options = match determined {
                Some(v) => vec![v],
                None => vec![false, true],
            };
            for v in options {
                values.insert(v);
                let mut h2 = h.clone();
                h2.push(Constraint { m, value: v });
                successors.insert(h2);
            }
        }
        out.push(ReconstructionStep {
            s,
            branches: histories.len(),
            f_recovered: probes.len() == 1,
            probe_candidates: probes.into_iter().collect(),
            f_value: b.bit(s),
            a_value: (!beyond && values.len() == 1).then(|| values.into_iter().next().unwrap()),
            a_beyond_prefix: beyond,
        });
        histories = successors;
    }
    Ok(out)
}
