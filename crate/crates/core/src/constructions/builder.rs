use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::{Engine, KValue, TimeBound};
use crate::error::{Error, Result};
use crate::io::ser_rational;
use crate::randomness::{space_lemma_length, FrozenMixture};
use crate::scalar::{rational_from_int, Rational};
use crate::toyvm::Oracle;

#[derive(Clone, Debug)]
pub struct BuilderConfig {
    pub rounds: usize,
    /// Stands in for the halting set.
    pub oracle: Oracle,
    /// Stands in for the dominating function; one bound serves both roles
    /// the construction gives it.
    pub time_bound: TimeBound,
}

/// `delta_n = 1 + 1/n^2`.
pub fn delta(n: usize) -> Rational {
    let n2 = rational_from_int((n * n) as u64);
    Rational::one() + Rational::one() / n2
}

/// `prod_{i=1..n} delta_i`.
pub fn claim2_factor(n: usize) -> Rational {
    (1..=n).fold(Rational::one(), |acc, i| acc * delta(i))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub n: usize,
    pub sigma: BitString,
    pub sigma_hex: String,
    pub extension_length: u32,
    pub ext_count: usize,
    pub tau: BitString,
    pub d_num: String,
    pub d_den: String,
    #[serde(serialize_with = "ser_rational")]
    pub claim2_bound: Rational,
    pub k_value: KValue,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuilderChecks {
    pub claim2: bool,
    pub claim3: bool,
    pub prefix_chain: bool,
    pub unflagged_rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuilderTrace {
    pub rounds: Vec<RoundRecord>,
    pub checks: BuilderChecks,
    #[serde(serialize_with = "ser_rational")]
    pub d_root: Rational,
    pub oracle: String,
    pub time_bound: String,
    pub mixture_stage: u64,
    pub cap: usize,
}

impl BuilderTrace {
    pub fn output(&self) -> BitString {
        self.rounds.last().map(|r| r.sigma.clone()).unwrap_or_default()
    }

    /// `sigma_n` for `n = 0..=rounds`.
    pub fn sigmas(&self) -> Vec<BitString> {
        std::iter::once(BitString::new())
            .chain(self.rounds.iter().map(|r| r.sigma.clone()))
            .collect()
    }
}

/// Round `n` extends `sigma_{n-1}` by `l(delta_n, 2^n)` bits, keeping the
/// martingale below `delta_n` times its value and choosing the least
/// extension whose relativized time-bounded complexity exceeds `n - 1`.
pub fn build_deep_random(cfg: &BuilderConfig, d: &FrozenMixture, engine: &Engine) -> Result<BuilderTrace> {
    if cfg.rounds == 0 {
        return Err(Error::InvalidArgument("at least one round".into()));
    }
    // one run table at the final length serves every round
    let mut total = 0usize;
    for n in 1..=cfg.rounds {
        total += space_lemma_length(&delta(n), 1u64 << n)? as usize;
    }
    engine.table(Some(&cfg.oracle), cfg.time_bound.at(total));
    let d_root = d.value(&BitString::new());
    let mut sigma = BitString::new();
    let mut d_sigma = d_root.clone();
    let mut rounds = Vec::with_capacity(cfg.rounds);
    let (mut claim2, mut claim3, mut chain) = (true, true, true);
    for n in 1..=cfg.rounds {
        let delta_n = delta(n);
        let l = space_lemma_length(&delta_n, 1u64 << n)?;
        let bound = &delta_n * &d_sigma;
        let cheap: Vec<(BitString, Rational)> = BitString::all_of_length(l as usize)
            .collect::<Vec<_>>()
            .into_par_iter()
            .filter_map(|tau| {
                let ext = sigma.concat(&tau);
                let v = d.value(&ext);
                (v < bound).then_some((tau, v))
            })
            .collect();
        if cheap.is_empty() {
            return Err(Error::Invariant(format!("no cheap extension in round {n}")));
        }
        let threshold = n as i64 - 1;
        let passes = |k: KValue| match k {
            KValue::Bits(b) => b as i64 > threshold,
            // above the cap means at least cap + 1
            KValue::AboveCap => engine.cap() as i64 + 1 > threshold,
        };
        let k_of = |tau: &BitString| {
            let ext = sigma.concat(tau);
            engine
                .k_time_bounded(&ext, &cfg.time_bound, Some(&cfg.oracle))
                .value
        };
        let chosen = cheap.iter().find_map(|(tau, v)| {
            let k = k_of(tau);
            passes(k).then(|| (tau.clone(), v.clone(), k, false))
        });
        let (tau, v, k, flagged) = match chosen {
            Some(c) => c,
            None => {
                let (tau, v) = cheap
                    .iter()
                    .max_by(|a, b| k_of(&a.0).cmp(&k_of(&b.0)).then(b.0.cmp(&a.0)))
                    .cloned()
                    .expect("nonempty");
                let k = k_of(&tau);
                (tau, v, k, true)
            }
        };
        let next = sigma.concat(&tau);
        chain &= sigma.is_prefix_of(&next);
        claim3 &= next.len() - sigma.len() == l as usize;
        let claim2_bound = &d_root * claim2_factor(n);
        claim2 &= v <= claim2_bound;
        sigma = next;
        d_sigma = v;
        rounds.push(RoundRecord {
            n,
            sigma_hex: sigma.to_hex(),
            sigma: sigma.clone(),
            extension_length: l,
            ext_count: cheap.len(),
            tau,
            d_num: d_sigma.numer().to_string(),
            d_den: d_sigma.denom().to_string(),
            claim2_bound,
            k_value: k,
            flagged,
        });
    }
    let unflagged_rounds = rounds.iter().filter(|r| !r.flagged).count();
    Ok(BuilderTrace {
        rounds,
        checks: BuilderChecks {
            claim2,
            claim3,
            prefix_chain: chain,
            unflagged_rounds,
        },
        d_root,
        oracle: cfg.oracle.descriptor(),
        time_bound: cfg.time_bound.to_string(),
        mixture_stage: d.stage,
        cap: engine.cap(),
    })
}

/// Least-squares fit of `|sigma_n|` against `n^2 / 2`: returns the slope.
pub fn claim3_fit(trace: &BuilderTrace) -> f64 {
    let (mut xy, mut xx) = (0.0, 0.0);
    for r in &trace.rounds {
        let x = (r.n * r.n) as f64 / 2.0;
        xy += x * r.sigma.len() as f64;
        xx += x * x;
    }
    if xx == 0.0 {
        0.0
    } else {
        xy / xx
    }
}
