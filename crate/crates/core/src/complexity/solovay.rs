use serde::Serialize;

use super::engine::Engine;
use super::timebound::TimeBound;
use crate::bits::BitString;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolovayReport {
    pub n_range: u64,
    pub c: u64,
    pub stage: u64,
    /// `n` with `K^t(bin n) <= K_s(bin n) + c`, both finite.
    pub tight: Vec<u64>,
    /// `n` with `K_s(bin n) > K^t(bin n)`; empty whenever `s` covers the budget.
    pub violations: Vec<u64>,
    /// `n` where `K^t` is above the cap.
    pub above_cap: Vec<u64>,
    pub density: f64,
    /// Least `c` that would make `tight` nonempty.
    pub least_c: Option<u64>,
}

/// Compares `K^t` and `K_s` on the binary expansions of `0..n_range`.
pub fn solovay_probe(engine: &Engine, t: &TimeBound, n_range: u64, c: u64, s: u64) -> SolovayReport {
    let mut tight = Vec::new();
    let mut violations = Vec::new();
    let mut above_cap = Vec::new();
    let mut least_c: Option<u64> = None;
    for n in 0..n_range {
        let sigma = BitString::binary_expansion(n);
        let kt = engine.k_time_bounded(&sigma, t, None).value;
        let ks = engine.k_stage(&sigma, s, None).value;
        if ks > kt {
            violations.push(n);
        }
        match (kt.finite(), ks.finite()) {
            (Some(kt), Some(ks)) => {
                let gap = kt.saturating_sub(ks) as u64;
                least_c = Some(least_c.map_or(gap, |m| m.min(gap)));
                if gap <= c {
                    tight.push(n);
                }
            }
            (None, _) => above_cap.push(n),
            _ => {}
        }
    }
    let density = if n_range == 0 {
        0.0
    } else {
        tight.len() as f64 / n_range as f64
    };
    SolovayReport {
        n_range,
        c,
        stage: s,
        tight,
        violations,
        above_cap,
        density,
        least_c,
    }
}
