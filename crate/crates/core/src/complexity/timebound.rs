use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// A total nondecreasing `t: N -> N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TimeBound {
    /// `t(n) = a * (n + 1)^b`, saturating.
    Poly { a: u64, b: u32 },
    /// Explicit values; the last one extends to all larger `n`.
    Table(Vec<u64>),
    /// `t(n) * (1 + cost * (t(n) + 1))`: a bound after lifting through a
    /// reduction with the given per-index cost.
    Lifted { base: Box<TimeBound>, cost: u64 },
}

impl TimeBound {
    pub fn poly(a: u64, b: u32) -> Self {
        TimeBound::Poly { a, b }
    }

    pub fn table(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty time-bound table".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "time-bound table must be nondecreasing".into(),
            ));
        }
        Ok(TimeBound::Table(values))
    }

    pub fn at(&self, n: usize) -> u64 {
        match self {
            TimeBound::Poly { a, b } => (n as u64 + 1)
                .checked_pow(*b)
                .and_then(|p| p.checked_mul(*a))
                .unwrap_or(u64::MAX),
            TimeBound::Table(v) => v[n.min(v.len() - 1)],
            TimeBound::Lifted { base, cost } => {
                let t = base.at(n);
                cost.saturating_mul(t.saturating_add(1))
                    .saturating_add(1)
                    .saturating_mul(t)
            }
        }
    }

    /// Parses `poly:a,b` or `table:<path>`; the table file holds integers
    /// separated by whitespace or commas.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("poly:") {
            let (a, b) = rest
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad poly bound {spec:?}")))?;
            let a = a
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient in {spec:?}")))?;
            let b = b
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {spec:?}")))?;
            return Ok(TimeBound::poly(a, b));
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return Self::read_table(Path::new(path));
        }
        Err(Error::Parse(format!("unknown time bound {spec:?}")))
    }

    pub fn read_table(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<u64>()
                    .map_err(|_| Error::Parse(format!("bad table entry {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::table(values)
    }

    /// Pointwise `self <= other` on `0..=max_n`.
    pub fn below_on(&self, other: &TimeBound, max_n: usize) -> bool {
        (0..=max_n).all(|n| self.at(n) <= other.at(n))
    }
}

impl fmt::Display for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBound::Poly { a, b } => write!(f, "poly:{a},{b}"),
            TimeBound::Table(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "table:[{}]", parts.join(","))
            }
            TimeBound::Lifted { base, cost } => write!(f, "lift:{cost}:{base}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_values() {
        let t = TimeBound::poly(10, 1);
        assert_eq!(t.at(0), 10);
        assert_eq!(t.at(3), 40);
        assert_eq!(TimeBound::poly(4, 2).at(2), 36);
        assert_eq!(TimeBound::poly(2, 60).at(1000), u64::MAX);
    }

    #[test]
    fn table_extends_last_value() {
        let t = TimeBound::table(vec![1, 5, 5, 9]).unwrap();
        assert_eq!(t.at(2), 5);
        assert_eq!(t.at(100), 9);
        assert!(TimeBound::table(vec![3, 2]).is_err());
    }

    #[test]
    fn lifted_bound() {
        let t = TimeBound::Lifted {
            base: Box::new(TimeBound::poly(2, 1)),
            cost: 3,
        };
        assert_eq!(t.at(0), 2 * (1 + 3 * 3));
    }

    #[test]
    fn parse_poly() {
        assert_eq!(TimeBound::parse("poly:2,2").unwrap(), TimeBound::poly(2, 2));
        assert!(TimeBound::parse("poly:2").is_err());
        assert!(TimeBound::parse("exp:2").is_err());
    }
}
