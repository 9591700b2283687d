use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::{Engine, TimeBound};
use crate::error::{Error, Result};
use crate::io::ser_rational;
use crate::scalar::{dyadic, Rational};
use crate::semimeasure::{m_relative, m_relative_all, m_stage, m_stage_all};

/// The oracle-free parts of the truncated integral test, shared across oracles.
pub struct PsiContext {
    pub t: TimeBound,
    pub t_prime: TimeBound,
    pub c: Rational,
    pub max_len: usize,
    pub stage: u64,
    m_s: BTreeMap<BitString, Rational>,
    m_tp: BTreeMap<BitString, Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiRecord {
    #[serde(serialize_with = "ser_rational")]
    pub value: Rational,
    pub value_f64: f64,
    /// Terms with a positive numerator but no time-`t'` description.
    pub dropped_terms: usize,
    pub terms: usize,
}

impl PsiContext {
    pub fn new(
        engine: &Engine,
        t: TimeBound,
        t_prime: TimeBound,
        c: Rational,
        max_len: usize,
        stage: u64,
    ) -> Result<Self> {
        if c <= Rational::zero() {
            return Err(Error::InvalidArgument("c must be positive".into()));
        }
        let m_s = m_stage_all(engine, stage, None)
            .into_iter()
            .filter(|(s, _)| s.len() <= max_len)
            .collect();
        let mut m_tp = BTreeMap::new();
        for n in 0..=max_len {
            m_tp.extend(
                m_stage_all(engine, t_prime.at(n), None)
                    .into_iter()
                    .filter(|(s, _)| s.len() == n),
            );
        }
        Ok(Self {
            t,
            t_prime,
            c,
            max_len,
            stage,
            m_s,
            m_tp,
        })
    }

    /// `m^{A,t}` on strings up to the length cap for one oracle prefix.
    pub fn relative(&self, engine: &Engine, prefix: &BitString) -> Result<BTreeMap<BitString, Rational>> {
        let mut out = BTreeMap::new();
        for n in 0..=self.max_len {
            out.extend(
                m_relative_all(engine, self.t.at(n), prefix)?
                    .into_iter()
                    .filter(|(s, _)| s.len() == n),
            );
        }
        Ok(out)
    }

    /// `sum over |sigma| <= L of m^{A,t}(sigma) m_s(sigma) / (c m^{t'}(sigma))`.
    pub fn psi(&self, engine: &Engine, prefix: &BitString) -> Result<PsiRecord> {
        let rel = self.relative(engine, prefix)?;
        Ok(self.psi_from(&rel))
    }

    fn psi_from(&self, rel: &BTreeMap<BitString, Rational>) -> PsiRecord {
        let mut value = Rational::zero();
        let mut dropped = 0;
        let mut terms = 0;
        for (sigma, ma) in rel {
            let Some(ms) = self.m_s.get(sigma) else {
                continue;
            };
            match self.m_tp.get(sigma) {
                Some(mt) => {
                    value += ma * ms / (&self.c * mt);
                    terms += 1;
                }
                None => dropped += 1,
            }
        }
        PsiRecord {
            value_f64: crate::scalar::Scalar::to_f64(&value),
            value,
            dropped_terms: dropped,
            terms,
        }
    }

    /// Exact average of the truncated test over all `2^d` oracle prefixes.
    pub fn average(&self, engine: &Engine, d: usize) -> Result<Rational> {
        let mut sum = Rational::zero();
        for prefix in BitString::all_of_length(d) {
            sum += self.psi(engine, &prefix)?.value;
        }
        Ok(sum * dyadic(d as u32))
    }

    /// `max over sigma of avg_A m^{A,t}(sigma) / m^{t'}(sigma)`: with `c` at
    /// least this, the averaged test is at most the mass of `m_s`.
    pub fn domination_constant(&self, engine: &Engine, d: usize) -> Result<Rational> {
        let mut avg: BTreeMap<BitString, Rational> = BTreeMap::new();
        for prefix in BitString::all_of_length(d) {
            for (s, v) in self.relative(engine, &prefix)? {
                *avg.entry(s).or_insert_with(Rational::zero) += v;
            }
        }
        let scale = dyadic(d as u32);
        Ok(avg
            .iter()
            .filter_map(|(s, v)| self.m_tp.get(s).map(|mt| v * &scale / mt))
            .fold(Rational::zero(), |m, r| if r > m { r } else { m }))
    }
}

/// One-shot truncated `Psi(A)` for an oracle prefix.
pub fn psi(
    engine: &Engine,
    prefix: &BitString,
    t: &TimeBound,
    t_prime: &TimeBound,
    c: &Rational,
    max_len: usize,
    stage: u64,
) -> Result<PsiRecord> {
    PsiContext::new(engine, t.clone(), t_prime.clone(), c.clone(), max_len, stage)?.psi(engine, prefix)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheapMeasure {
    /// `mu{Y : m^{Y,stage}(X|n) >= k m^t(X|n)}`.
    #[serde(serialize_with = "ser_rational")]
    pub measure: Rational,
    /// `m^t(X|n)`.
    #[serde(serialize_with = "ser_rational")]
    pub base: Rational,
    /// `avg_Y m^{Y,stage}(X|n) / m^t(X|n)`; absent when the base is zero.
    pub average_ratio: Option<String>,
    #[serde(skip)]
    pub average_ratio_exact: Option<Rational>,
}

impl CheapMeasure {
    /// `measure <= C / k`, exactly.
    pub fn markov_holds(&self, k: u64) -> Option<bool> {
        let c = self.average_ratio_exact.as_ref()?;
        Some(self.measure <= c / Rational::from_integer(k.into()))
    }
}

pub fn measure_cheap_oracles(
    engine: &Engine,
    x_prefix: &BitString,
    n: usize,
    k: u64,
    t: &TimeBound,
    stage: u64,
    d: usize,
) -> Result<CheapMeasure> {
    if n > x_prefix.len() {
        return Err(Error::Precondition(format!(
            "n = {n} exceeds prefix length {}",
            x_prefix.len()
        )));
    }
    let sigma = x_prefix.prefix(n);
    let base = m_stage(engine, &sigma, t.at(n), None);
    let threshold = &base * Rational::from_integer(k.into());
    let mut hits = 0u64;
    let mut sum = Rational::zero();
    for y in BitString::all_of_length(d) {
        let v = m_relative(engine, &sigma, stage, &y)?;
        if v >= threshold {
            hits += 1;
        }
        sum += v;
    }
    let scale = dyadic(d as u32);
    let ratio = (!base.is_zero()).then(|| sum * &scale / &base);
    Ok(CheapMeasure {
        measure: Rational::from_integer(hits.into()) * scale,
        base,
        average_ratio: ratio.as_ref().map(crate::scalar::format_rational),
        average_ratio_exact: ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::scalar::rational;
    use num_traits::One;

    #[test]
    fn zero_budget_keeps_only_empty_term() {
        let e = Engine::new(12);
        let t = TimeBound::poly(10, 1);
        let ctx = PsiContext::new(&e, t, TimeBound::poly(0, 0), rational(1, 1), 3, 100).unwrap();
        let r = ctx.psi(&e, &bs("0")).unwrap();
        assert_eq!(r.terms, 1);
        assert!(r.dropped_terms > 0);
    }

    #[test]
    fn cancellation_without_oracle_use() {
        // at cap 14 a body that queries has no room left to emit, so only
        // the empty string's term sees the oracle
        let e = Engine::new(14);
        let t = TimeBound::poly(10, 1);
        let c = rational(1, 1);
        let a = bs("0");
        let r = psi(&e, &a, &t, &t, &c, 3, 500).unwrap();
        let ms = |s: &BitString| m_stage(&e, s, 500, None);
        let mt = |s: &BitString| m_stage(&e, s, t.at(s.len()), None);
        let lambda = BitString::new();
        let ma = m_relative(&e, &lambda, t.at(0), &a).unwrap();
        let mut expected = ma * ms(&lambda) / mt(&lambda);
        for s in BitString::all_up_to(3).skip(1) {
            if !mt(&s).is_zero() {
                expected += ms(&s);
            }
        }
        assert_eq!(r.value, expected);
    }

    #[test]
    fn monotone_in_length_and_stage() {
        let e = Engine::new(16);
        let t = TimeBound::poly(10, 1);
        let c = rational(2, 1);
        let mut last = Rational::zero();
        for l in 0..4 {
            let v = psi(&e, &bs("01"), &t, &t, &c, l, 300).unwrap().value;
            assert!(v >= last);
            last = v;
        }
        let lo = psi(&e, &bs("01"), &t, &t, &c, 3, 30).unwrap().value;
        assert!(lo <= last);
    }

    #[test]
    fn average_below_one_with_measured_constant() {
        let e = Engine::new(16);
        let t = TimeBound::poly(10, 1);
        let mut ctx = PsiContext::new(&e, t.clone(), t, rational(1, 1), 3, 300).unwrap();
        let c = ctx.domination_constant(&e, 2).unwrap();
        ctx.c = c;
        assert!(ctx.average(&e, 2).unwrap() <= Rational::one());
    }

    #[test]
    fn markov_and_monotone_in_k() {
        let e = Engine::new(16);
        let t = TimeBound::poly(10, 1);
        let mut last = Rational::one();
        for k in [1, 2, 4, 8] {
            let r = measure_cheap_oracles(&e, &bs("1"), 1, k, &t, 20, 2).unwrap();
            assert_eq!(r.markov_holds(k), Some(true));
            assert!(r.measure <= last);
            last = r.measure;
        }
    }
}
