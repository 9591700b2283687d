use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::Engine;
use crate::scalar::{dyadic, Rational};
use crate::toyvm::Oracle;

/// A lower approximation `m_s(sigma)` that is nondecreasing in `s`.
pub trait StagedSemimeasure: Sync {
    fn at(&self, sigma: &BitString, stage: u64) -> Rational;
    fn description(&self) -> String;
}

/// `m_s(sigma) = sum of 2^-|p|` over programs halting on `sigma` within `s` steps.
pub struct MachineSemimeasure<'a> {
    pub engine: &'a Engine,
    pub oracle: Option<Oracle>,
}

impl<'a> MachineSemimeasure<'a> {
    pub fn new(engine: &'a Engine, oracle: Option<Oracle>) -> Self {
        Self { engine, oracle }
    }
}

impl StagedSemimeasure for MachineSemimeasure<'_> {
    fn at(&self, sigma: &BitString, stage: u64) -> Rational {
        m_stage(self.engine, sigma, stage, self.oracle.as_ref())
    }

    fn description(&self) -> String {
        let oracle = self.oracle.as_ref().map_or("none".into(), Oracle::descriptor);
        format!("machine:cap={},oracle={oracle}", self.engine.cap())
    }
}

pub fn m_stage(engine: &Engine, sigma: &BitString, s: u64, oracle: Option<&Oracle>) -> Rational {
    let table = engine.table(oracle, s);
    engine
        .programs()
        .iter()
        .enumerate()
        .filter(|(i, _)| table.output_within(*i, s) == Some(sigma))
        .fold(Rational::zero(), |acc, (_, p)| acc + dyadic(p.len() as u32))
}

/// `m_s` on every string it charges, in string order.
pub fn m_stage_all(engine: &Engine, s: u64, oracle: Option<&Oracle>) -> BTreeMap<BitString, Rational> {
    let table = engine.table(oracle, s);
    let mut out: BTreeMap<BitString, Rational> = BTreeMap::new();
    for (i, p) in engine.programs().iter().enumerate() {
        if let Some(sigma) = table.output_within(i, s) {
            *out.entry(sigma.clone()).or_insert_with(Rational::zero) += dyadic(p.len() as u32);
        }
    }
    out
}

pub fn total_mass(m: &BTreeMap<BitString, Rational>) -> Rational {
    m.values().fold(Rational::zero(), |a, v| a + v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodingGap {
    /// `m_s(sigma) * 2^K_s(sigma)`, at least 1.
    #[serde(serialize_with = "crate::io::ser_rational")]
    pub ratio: Rational,
    /// `K_s(sigma) + log2 m_s(sigma)`.
    pub gap: f64,
}

/// `None` when `sigma` has no program within the cap.
pub fn coding_gap(engine: &Engine, sigma: &BitString, s: u64) -> Option<CodingGap> {
    let k = engine.k_stage(sigma, s, None).value.finite()?;
    let m = m_stage(engine, sigma, s, None);
    let ratio = m * Rational::from_integer(num_bigint::BigInt::one() << k);
    let gap = log2_rational(&ratio);
    Some(CodingGap { ratio, gap })
}

/// `log2` of a positive rational without overflowing `f64`.
pub fn log2_rational(x: &Rational) -> f64 {
    let n = x.numer();
    let d = x.denom();
    let (nb, db) = (n.bits() as i64, d.bits() as i64);
    let shift = |v: &num_bigint::BigInt, b: i64| -> f64 {
        let drop = (b - 60).max(0) as usize;
        let top: f64 = num_traits::ToPrimitive::to_f64(&(v >> drop)).unwrap_or(f64::NAN);
        top.log2() + drop as f64
    };
    shift(n, nb) - shift(d, db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn zero_stage_charges_only_empty() {
        let e = Engine::new(12);
        assert_eq!(m_stage(&e, &bs("0"), 0, None), Rational::zero());
        assert!(m_stage(&e, &bs(""), 0, None) >= dyadic(1));
    }

    #[test]
    fn mass_below_one() {
        let e = Engine::new(14);
        let all = m_stage_all(&e, 500, None);
        assert!(total_mass(&all) <= Rational::one());
    }

    #[test]
    fn gap_is_nonnegative() {
        let e = Engine::new(14);
        for sigma in BitString::all_up_to(4) {
            if let Some(g) = coding_gap(&e, &sigma, 500) {
                assert!(g.ratio >= Rational::one());
                assert!(g.gap >= 0.0);
            }
        }
    }

    #[test]
    fn log2_of_large_ratio() {
        let x = Rational::new(num_bigint::BigInt::one() << 200, 3.into());
        assert!((log2_rational(&x) - (200.0 - 3f64.log2())).abs() < 1e-9);
    }
}
