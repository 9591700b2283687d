use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_traits::{One, Zero};
use rand::Rng;

use super::staged::{total_mass, StagedSemimeasure};
use crate::bits::BitString;
use crate::complexity::Engine;
use crate::error::{Error, Result};
use crate::io::{format_sigma_table, parse_sigma_table};
use crate::scalar::{dyadic, Rational, Scalar};
use crate::toyvm::Oracle;

/// A finite table of values, zero off its support.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComputableSemimeasure {
    table: BTreeMap<BitString, Rational>,
}

impl ComputableSemimeasure {
    pub fn new(table: BTreeMap<BitString, Rational>) -> Result<Self> {
        if let Some((s, _)) = table.iter().find(|(_, v)| v.is_negative_value()) {
            return Err(Error::InvalidArgument(format!("negative value at {s}")));
        }
        if total_mass(&table) > Rational::one() {
            return Err(Error::InvalidArgument("mass exceeds 1".into()));
        }
        Ok(Self { table })
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn get(&self, sigma: &BitString) -> Rational {
        self.table.get(sigma).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn table(&self) -> &BTreeMap<BitString, Rational> {
        &self.table
    }

    pub fn mass(&self) -> Rational {
        total_mass(&self.table)
    }

    /// `factor * m_stage` frozen on strings of length `<= max_len`.
    pub fn frozen(
        m: &dyn StagedSemimeasure,
        stage: u64,
        factor: &Rational,
        max_len: usize,
    ) -> Result<Self> {
        let table = BitString::all_up_to(max_len)
            .map(|s| {
                let v = m.at(&s, stage) * factor;
                (s, v)
            })
            .filter(|(_, v)| !v.is_zero())
            .collect();
        Self::new(table)
    }

    /// Each value of `base` scaled by an independent random dyadic in `(0, 1]`.
    pub fn random_below<R: Rng>(base: &ComputableSemimeasure, rng: &mut R) -> Self {
        let table = base
            .table
            .iter()
            .map(|(s, v)| {
                let num: u64 = rng.gen_range(1..=16);
                (s.clone(), v * Rational::new(num.into(), 16.into()))
            })
            .collect();
        Self { table }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::new(parse_sigma_table(&text)?.into_iter().collect())
    }

    pub fn to_text(&self) -> String {
        format_sigma_table(&self.table)
    }
}

/// Least stage `s <= ceiling` with `m(sigma) < c * m_s(sigma)` for every
/// `sigma` of length `n` on which `m` is positive.
///
/// Strings where `m` vanishes are exempt: the machine may never reach them,
/// and domination there holds with any constant.
pub fn semimeasure_to_timebound(
    m: &ComputableSemimeasure,
    c: &Rational,
    n: usize,
    engine: &Engine,
    oracle: Option<&Oracle>,
    ceiling: u64,
) -> Result<u64> {
    if *c <= Rational::zero() {
        return Err(Error::InvalidArgument("constant must be positive".into()));
    }
    let table = engine.table(oracle, ceiling);
    let targets: Vec<(BitString, Rational)> = BitString::all_of_length(n)
        .map(|s| {
            let v = m.get(&s);
            (s, v)
        })
        .filter(|(_, v)| !v.is_zero())
        .collect();
    // halting events per target: (steps, 2^-|p|)
    let mut events: Vec<Vec<(u64, Rational)>> = vec![Vec::new(); targets.len()];
    let mut candidates = BTreeSet::from([0u64]);
    for (i, p) in engine.programs().iter().enumerate() {
        let Some(out) = table.output_within(i, ceiling) else {
            continue;
        };
        if let Some(j) = targets.iter().position(|(s, _)| s == out) {
            let steps = table.outcomes[i].steps();
            events[j].push((steps, dyadic(p.len() as u32)));
            candidates.insert(steps);
        }
    }
    'stage: for &s in &candidates {
        for ((_, mv), ev) in targets.iter().zip(&events) {
            let ms = ev
                .iter()
                .filter(|(st, _)| *st <= s)
                .fold(Rational::zero(), |a, (_, w)| a + w);
            if !(*mv < c * ms) {
                continue 'stage;
            }
        }
        return Ok(s);
    }
    Err(Error::NoStageWithinBudget { ceiling })
}

/// The per-length map `n -> stage` for `0..=max_n`.
pub fn constructed_bound(
    m: &ComputableSemimeasure,
    c: &Rational,
    max_n: usize,
    engine: &Engine,
    oracle: Option<&Oracle>,
    ceiling: u64,
) -> Result<Vec<u64>> {
    (0..=max_n)
        .map(|n| semimeasure_to_timebound(m, c, n, engine, oracle, ceiling))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use crate::semimeasure::staged::MachineSemimeasure;

    #[test]
    fn zero_semimeasure_gives_stage_zero() {
        let e = Engine::new(14);
        for n in 0..4 {
            let s = semimeasure_to_timebound(
                &ComputableSemimeasure::zero(),
                &rational(1, 1),
                n,
                &e,
                None,
                1000,
            )
            .unwrap();
            assert_eq!(s, 0);
        }
    }

    #[test]
    fn frozen_half_converts_within_its_stage() {
        let e = Engine::new(16);
        let mm = MachineSemimeasure::new(&e, None);
        let m = ComputableSemimeasure::frozen(&mm, 1000, &rational(1, 2), 4).unwrap();
        let c = rational(4, 1);
        for n in 0..=4 {
            let s = semimeasure_to_timebound(&m, &c, n, &e, None, 5000).unwrap();
            assert!(s <= 1000);
            for sigma in BitString::all_of_length(n) {
                let v = m.get(&sigma);
                if !v.is_zero() {
                    assert!(v < &c * mm.at(&sigma, s));
                }
            }
        }
    }

    #[test]
    fn tiny_constant_exhausts_ceiling() {
        let e = Engine::new(14);
        let mm = MachineSemimeasure::new(&e, None);
        let m = ComputableSemimeasure::frozen(&mm, 500, &rational(1, 1), 2).unwrap();
        let r = semimeasure_to_timebound(&m, &rational(1, 2), 1, &e, None, 500);
        assert_eq!(r, Err(Error::NoStageWithinBudget { ceiling: 500 }));
    }

    #[test]
    fn rejects_excess_mass() {
        let t = BTreeMap::from([(BitString::new(), rational(3, 2))]);
        assert!(ComputableSemimeasure::new(t).is_err());
    }
}
