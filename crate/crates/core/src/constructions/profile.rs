use serde::Serialize;

use crate::bits::BitString;
use crate::complexity::{Engine, KValue, Reduction, TimeBound};
use crate::error::{Error, Result};
use crate::toyvm::Oracle;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProfileRow {
    pub n: usize,
    pub k_time: KValue,
    pub k_stage: KValue,
    /// `k_time - k_stage` when both are finite.
    pub gap: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DepthProfile {
    pub rows: Vec<ProfileRow>,
    pub time_bound: String,
    pub stage: u64,
    pub oracle: String,
    /// Set when the stage is below some `t(n)`, so `K_s` may exceed `K^t`.
    pub stage_warning: bool,
}

impl DepthProfile {
    pub fn gap_at(&self, n: usize) -> Option<i64> {
        self.rows.get(n.checked_sub(1)?).and_then(|r| r.gap)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,k_time,k_stage,gap\n");
        for r in &self.rows {
            let gap = r.gap.map(|g| g.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{gap}\n", r.n, r.k_time, r.k_stage));
        }
        out
    }
}

/// `K^t(X|n)` against `K_s(X|n)` for `1 <= n <= |X|`.
pub fn depth_profile(
    engine: &Engine,
    x: &BitString,
    t: &TimeBound,
    s: u64,
    oracle: Option<&Oracle>,
) -> DepthProfile {
    let rows = (1..=x.len())
        .map(|n| {
            let prefix = x.prefix(n);
            let k_time = engine.k_time_bounded(&prefix, t, oracle).value;
            let k_stage = engine.k_stage(&prefix, s, oracle).value;
            let gap = match (k_time.finite(), k_stage.finite()) {
                (Some(a), Some(b)) => Some(a as i64 - b as i64),
                _ => None,
            };
            ProfileRow {
                n,
                k_time,
                k_stage,
                gap,
            }
        })
        .collect();
    DepthProfile {
        rows,
        time_bound: t.to_string(),
        stage: s,
        oracle: oracle.map_or("none".into(), Oracle::descriptor),
        stage_warning: (1..=x.len()).any(|n| t.at(n) > s),
    }
}

pub fn symdiff(a: &BitString, x: &BitString) -> Result<BitString> {
    a.xor(x)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SglComparison {
    pub x: DepthProfile,
    pub y: DepthProfile,
    /// `max over n of gap_X(n) - gap_Y(n)` where both are finite; 0 if none.
    pub measured_c: i64,
    pub wrapper_cost: usize,
    /// `gap_Y(n) >= gap_X(n) - measured_c` on every comparable row.
    pub holds: bool,
    pub comparable_rows: usize,
}

/// Checks that `reduction` computes `x` from oracle `y` within its declared
/// cost, then profiles both strings on the first `|x|` lengths.
pub fn sgl_compare(
    engine: &Engine,
    x: &BitString,
    y: &BitString,
    reduction: &Reduction,
    t: &TimeBound,
    s: u64,
    oracle: Option<&Oracle>,
) -> Result<SglComparison> {
    let base = Oracle::prefix(y.clone());
    for i in 0..x.len() {
        match reduction.answer(i as u64, &base, reduction.budget_for(i as u64)) {
            Some((b, _)) if b == x.bit(i) => {}
            _ => {
                return Err(Error::Precondition(format!(
                    "reduction does not produce bit {i} of X from Y"
                )))
            }
        }
    }
    let px = depth_profile(engine, x, t, s, oracle);
    let py = depth_profile(engine, &y.prefix(x.len().min(y.len())), t, s, oracle);
    let pairs: Vec<(i64, i64)> = px
        .rows
        .iter()
        .zip(&py.rows)
        .filter_map(|(a, b)| Some((a.gap?, b.gap?)))
        .collect();
    let measured_c = pairs.iter().map(|(gx, gy)| gx - gy).max().unwrap_or(0).max(0);
    let holds = pairs.iter().all(|(gx, gy)| *gy >= gx - measured_c);
    Ok(SglComparison {
        comparable_rows: pairs.len(),
        x: px,
        y: py,
        measured_c,
        wrapper_cost: reduction.program.len(),
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn zeros_have_no_gap() {
        let e = Engine::new(14);
        let t = TimeBound::poly(20, 1);
        let s = t.at(8);
        let p = depth_profile(&e, &BitString::zeros(8), &t, s, None);
        for r in &p.rows {
            assert!(r.gap.is_none() || r.gap == Some(0), "{r:?}");
        }
    }

    #[test]
    fn gap_shrinks_with_stage() {
        let e = Engine::new(14);
        let t = TimeBound::poly(5, 1);
        let x = bs("0110100110");
        let lo = depth_profile(&e, &x, &t, 100, None);
        let hi = depth_profile(&e, &x, &t, 2000, None);
        for (a, b) in lo.rows.iter().zip(&hi.rows) {
            assert!(b.k_stage <= a.k_stage);
            if let (Some(ga), Some(gb)) = (a.gap, b.gap) {
                assert!(gb >= ga);
            }
        }
    }

    #[test]
    fn symdiff_identities() {
        let a = bs("1100");
        assert_eq!(symdiff(&a, &a).unwrap(), bs("0000"));
        assert_eq!(symdiff(&a, &bs("0000")).unwrap(), a);
        assert!(symdiff(&a, &bs("0")).is_err());
    }

    #[test]
    fn identity_comparison_is_flat() {
        let e = Engine::new(14);
        let t = TimeBound::poly(5, 1);
        let x = bs("01101001");
        let c = sgl_compare(&e, &x, &x, &Reduction::identity(), &t, 1000, None).unwrap();
        assert_eq!(c.x, c.y);
        assert_eq!(c.measured_c, 0);
        assert!(c.holds);
    }

    #[test]
    fn wrong_reduction_rejected() {
        let e = Engine::new(12);
        let t = TimeBound::poly(5, 1);
        let r = sgl_compare(&e, &bs("01"), &bs("10"), &Reduction::identity(), &t, 100, None);
        assert!(r.is_err());
    }
}
