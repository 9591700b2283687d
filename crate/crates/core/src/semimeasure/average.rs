use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::{Engine, TimeBound};
use crate::error::{Error, Result};
use crate::scalar::{dyadic, Rational};
use crate::toyvm::{run_from, AbortReason, Instr, Oracle, PartialOracle, RunOutcome};

/// `m^{A,t}(sigma)` for one oracle prefix of length `d`; any query at or
/// beyond `d` is a validation failure.
pub fn m_relative(
    engine: &Engine,
    sigma: &BitString,
    budget: u64,
    prefix: &BitString,
) -> Result<Rational> {
    let oracle = Oracle::prefix(prefix.clone());
    let d = prefix.len();
    let terms: Vec<Result<Rational>> = engine
        .bodies()
        .par_iter()
        .zip(engine.programs())
        .map(|(body, p)| match run_from(body, &Some(&oracle), budget, [0; 4]).outcome {
            RunOutcome::Halted { output, .. } if output == *sigma => Ok(dyadic(p.len() as u32)),
            RunOutcome::Aborted {
                reason: AbortReason::OutOfTable(index),
                ..
            } => Err(Error::QueryBeyondDepth { index, depth: d }),
            _ => Ok(Rational::zero()),
        })
        .collect();
    let mut sum = Rational::zero();
    for t in terms {
        sum += t?;
    }
    Ok(sum)
}

/// `m^A` at a fixed budget on every string it charges.
pub fn m_relative_all(
    engine: &Engine,
    budget: u64,
    prefix: &BitString,
) -> Result<BTreeMap<BitString, Rational>> {
    let oracle = Oracle::prefix(prefix.clone());
    let table = engine.table(Some(&oracle), budget);
    let mut out: BTreeMap<BitString, Rational> = BTreeMap::new();
    for (i, p) in engine.programs().iter().enumerate() {
        match &table.outcomes[i] {
            RunOutcome::Halted { output, steps } if *steps <= budget => {
                *out.entry(output.clone()).or_insert_with(Rational::zero) += dyadic(p.len() as u32);
            }
            RunOutcome::Aborted {
                reason: AbortReason::OutOfTable(index),
                steps,
            } if *steps <= budget => {
                return Err(Error::QueryBeyondDepth {
                    index: *index,
                    depth: prefix.len(),
                })
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Average of `m^{A,t}(sigma)` over all `2^d` oracle prefixes.
pub fn oracle_average_enumerated(
    engine: &Engine,
    sigma: &BitString,
    t: &TimeBound,
    d: usize,
) -> Result<Rational> {
    let budget = t.at(sigma.len());
    let mut sum = Rational::zero();
    for prefix in BitString::all_of_length(d) {
        sum += m_relative(engine, sigma, budget, &prefix)?;
    }
    Ok(sum * dyadic(d as u32))
}

/// The same average as a weighted sum over halting (program, pinned bits)
/// pairs: each program's query tree is explored once, and a leaf fixing `j`
/// oracle bits contributes `2^(-|p| - j)`.
pub fn oracle_average_closed_form(
    engine: &Engine,
    sigma: &BitString,
    t: &TimeBound,
    d: usize,
) -> Result<Rational> {
    let budget = t.at(sigma.len());
    let terms: Vec<Result<Rational>> = engine
        .bodies()
        .par_iter()
        .zip(engine.programs())
        .map(|(body, p)| {
            let mut acc = Rational::zero();
            explore(body, sigma, budget, d, &mut PartialOracle::default(), p.len(), &mut acc)?;
            Ok(acc)
        })
        .collect();
    let mut sum = Rational::zero();
    for t in terms {
        sum += t?;
    }
    Ok(sum)
}

fn explore(
    body: &[Instr],
    sigma: &BitString,
    budget: u64,
    d: usize,
    partial: &mut PartialOracle,
    len: usize,
    acc: &mut Rational,
) -> Result<()> {
    match run_from(body, &*partial, budget, [0; 4]).outcome {
        RunOutcome::Halted { output, .. } if output == *sigma => {
            *acc += dyadic((len + partial.bits.len()) as u32);
        }
        RunOutcome::Aborted {
            reason: AbortReason::OutOfTable(index),
            ..
        } => {
            if index >= d as u64 {
                return Err(Error::QueryBeyondDepth { index, depth: d });
            }
            for b in [false, true] {
                partial.bits.insert(index, b);
                explore(body, sigma, budget, d, partial, len, acc)?;
            }
            partial.bits.remove(&index);
        }
        _ => {}
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
}

impl MonteCarlo {
    pub fn agrees_with(&self, exact: &Rational, sigmas: f64) -> bool {
        let x = exact.to_f64().unwrap_or(f64::NAN);
        (self.mean - x).abs() <= sigmas * self.std_error + 1e-15
    }
}

/// Estimates the average from random oracles. Only the first `d` bits of
/// each sampled oracle can be read, so per-prefix values are cached.
pub fn oracle_average_monte_carlo<R: Rng>(
    engine: &Engine,
    sigma: &BitString,
    t: &TimeBound,
    d: usize,
    samples: usize,
    rng: &mut R,
) -> Result<MonteCarlo> {
    let budget = t.at(sigma.len());
    let mut cache: Vec<Option<f64>> = vec![None; 1 << d];
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let k: usize = rng.gen_range(0..1usize << d);
        let v = match cache[k] {
            Some(v) => v,
            None => {
                let prefix = BitString::from_u64(k as u64, d);
                let v = m_relative(engine, sigma, budget, &prefix)?
                    .to_f64()
                    .unwrap_or(f64::NAN);
                cache[k] = Some(v);
                v
            }
        };
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(MonteCarlo {
        samples,
        mean,
        std_error: (var / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::semimeasure::m_stage;
    use crate::toyvm::{Program, Reg};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumeration_matches_closed_form() {
        let e = Engine::new(16);
        let t = TimeBound::poly(20, 1);
        for sigma in [bs(""), bs("0"), bs("1"), bs("01")] {
            let a = oracle_average_enumerated(&e, &sigma, &t, 2).unwrap();
            let b = oracle_average_closed_form(&e, &sigma, &t, 2).unwrap();
            assert_eq!(a, b, "{sigma}");
        }
    }

    #[test]
    fn oracle_free_cap_gives_plain_value() {
        // at cap 14 no body fits ORACLE followed by an output instruction
        let e = Engine::new(14);
        let t = TimeBound::poly(20, 1);
        let avg = oracle_average_closed_form(&e, &bs("1"), &t, 1).unwrap();
        let plain = m_stage(&e, &bs("1"), t.at(1), Some(&Oracle::AllZero));
        assert_eq!(avg, plain);
    }

    #[test]
    fn single_reader_contributes_half() {
        let p = Program::from_instrs(&[Instr::Oracle, Instr::EmitR, Instr::Halt]);
        let mut acc = Rational::zero();
        explore(
            &p.instructions(),
            &bs("1"),
            10,
            1,
            &mut PartialOracle::default(),
            p.len(),
            &mut acc,
        )
        .unwrap();
        assert_eq!(acc, dyadic(p.len() as u32 + 1));
    }

    #[test]
    fn deep_query_is_rejected() {
        let p = Program::from_instrs(&[Instr::Inc(Reg::R0), Instr::Inc(Reg::R0), Instr::Oracle]);
        let mut acc = Rational::zero();
        let r = explore(&p.instructions(), &bs(""), 10, 2, &mut PartialOracle::default(), p.len(), &mut acc);
        assert_eq!(r, Err(Error::QueryBeyondDepth { index: 2, depth: 2 }));
    }

    #[test]
    fn monte_carlo_within_three_errors() {
        let e = Engine::new(16);
        let t = TimeBound::poly(20, 1);
        let exact = oracle_average_closed_form(&e, &bs("1"), &t, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mc = oracle_average_monte_carlo(&e, &bs("1"), &t, 2, 2000, &mut rng).unwrap();
        assert!(mc.agrees_with(&exact, 3.0), "{mc:?} vs {exact}");
    }
}
