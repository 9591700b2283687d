//! Oracles answering the machine's ORACLE queries.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Reason a query could not be answered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleMiss {
    OutOfTable(u64),
    NoOracle,
    /// A reduction answering this index did not halt within its budget.
    Reduction(u64),
}

/// Anything that answers bit queries.
pub trait OracleSource: Sync {
    fn query(&self, index: u64) -> std::result::Result<bool, OracleMiss>;
}

/// The pinned oracle kinds.
#[derive(Clone)]
pub enum Oracle {
    /// Finite table; queries beyond it abort the run.
    PrefixTable(BitString),
    AllZero,
    /// Answers 1 at `e` iff `phi_e(e)` halts within the stage.
    SurrogateHalting(Arc<HaltingOracle>),
}

impl Oracle {
    pub fn prefix(bits: BitString) -> Oracle {
        Oracle::PrefixTable(bits)
    }

    pub fn halting(stage: u64) -> Oracle {
        Oracle::SurrogateHalting(Arc::new(HaltingOracle::new(stage)))
    }

    /// Parses `zero`, `halting:<stage>`, or `prefix:<01-string>`.
    pub fn parse(spec: &str) -> Result<Option<Oracle>> {
        let spec = spec.trim();
        if spec == "none" {
            return Ok(None);
        }
        if spec == "zero" {
            return Ok(Some(Oracle::AllZero));
        }
        if let Some(s) = spec.strip_prefix("halting:") {
            let stage = s
                .parse()
                .map_err(|_| Error::Parse(format!("bad halting stage {s:?}")))?;
            return Ok(Some(Oracle::halting(stage)));
        }
        if let Some(s) = spec.strip_prefix("prefix:") {
            return Ok(Some(Oracle::PrefixTable(s.parse()?)));
        }
        Err(Error::Parse(format!("unknown oracle {spec:?}")))
    }

    /// Reads a prefix-table file: one line of ASCII 0/1.
    pub fn read_prefix_file(path: &std::path::Path) -> Result<Oracle> {
        let text = std::fs::read_to_string(path)?;
        let line = text.lines().next().unwrap_or("");
        Ok(Oracle::PrefixTable(line.parse()?))
    }

    pub fn descriptor(&self) -> String {
        match self {
            Oracle::PrefixTable(b) => format!("prefix:{b}"),
            Oracle::AllZero => "zero".into(),
            Oracle::SurrogateHalting(h) => format!("halting:{}", h.stage()),
        }
    }
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl PartialEq for Oracle {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Oracle::PrefixTable(a), Oracle::PrefixTable(b)) => a == b,
            (Oracle::AllZero, Oracle::AllZero) => true,
            (Oracle::SurrogateHalting(a), Oracle::SurrogateHalting(b)) => a.stage() == b.stage(),
            _ => false,
        }
    }
}

impl Eq for Oracle {}

impl Hash for Oracle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.descriptor().hash(state);
    }
}

impl OracleSource for Oracle {
    fn query(&self, index: u64) -> std::result::Result<bool, OracleMiss> {
        match self {
            Oracle::PrefixTable(bits) => usize::try_from(index)
                .ok()
                .and_then(|i| bits.get(i))
                .ok_or(OracleMiss::OutOfTable(index)),
            Oracle::AllZero => Ok(false),
            Oracle::SurrogateHalting(h) => Ok(h.bit(index)),
        }
    }
}

/// Stand-in for no oracle: every query aborts the run.
pub struct NoOracle;

impl OracleSource for NoOracle {
    fn query(&self, _index: u64) -> std::result::Result<bool, OracleMiss> {
        Err(OracleMiss::NoOracle)
    }
}

impl OracleSource for Option<&Oracle> {
    fn query(&self, index: u64) -> std::result::Result<bool, OracleMiss> {
        match self {
            Some(o) => o.query(index),
            None => Err(OracleMiss::NoOracle),
        }
    }
}

/// A partial assignment of oracle bits; unassigned queries miss.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialOracle {
    pub bits: BTreeMap<u64, bool>,
}

impl OracleSource for PartialOracle {
    fn query(&self, index: u64) -> std::result::Result<bool, OracleMiss> {
        self.bits
            .get(&index)
            .copied()
            .ok_or(OracleMiss::OutOfTable(index))
    }
}

/// Stage-bounded diagonal halting set with a shared memo table.
pub struct HaltingOracle {
    stage: u64,
    memo: Mutex<HashMap<u64, bool>>,
}

impl HaltingOracle {
    pub fn new(stage: u64) -> Self {
        Self {
            stage,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn bit(&self, e: u64) -> bool {
        if let Some(&b) = self.memo.lock().unwrap().get(&e) {
            return b;
        }
        let b = super::recursion::diagonal_halts(e, self.stage);
        self.memo.lock().unwrap().insert(e, b);
        b
    }

    /// The first `n` bits of the set as a string.
    pub fn prefix(&self, n: usize) -> BitString {
        BitString::from_bits((0..n as u64).map(|e| self.bit(e)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn prefix_table_misses_past_end() {
        let o = Oracle::prefix(bs("101"));
        assert_eq!(o.query(0), Ok(true));
        assert_eq!(o.query(1), Ok(false));
        assert_eq!(o.query(3), Err(OracleMiss::OutOfTable(3)));
    }

    #[test]
    fn parse_descriptors() {
        assert_eq!(Oracle::parse("zero").unwrap(), Some(Oracle::AllZero));
        assert_eq!(Oracle::parse("none").unwrap(), None);
        assert_eq!(
            Oracle::parse("halting:100").unwrap().unwrap().descriptor(),
            "halting:100"
        );
        assert!(Oracle::parse("bogus").is_err());
    }
}
