use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::io::{format_sigma_table, parse_sigma_table};
use crate::scalar::{ceil_log2, Rational, Scalar};

/// Heap position of `sigma`: `2^|sigma| - 1 + value(sigma)`.
fn heap_index(sigma: &BitString) -> usize {
    sigma
        .bits()
        .iter()
        .fold(0usize, |i, &b| 2 * i + 1 + b as usize)
}

/// A fair betting function on all strings up to a fixed depth.
#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleTable<T> {
    depth: usize,
    values: Vec<T>,
}

impl<T: Scalar> MartingaleTable<T> {
    /// Values in length-lexicographic order; fairness and nonnegativity are checked.
    pub fn new(depth: usize, values: Vec<T>) -> Result<Self> {
        let expected = (1usize << (depth + 1)) - 1;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: expected,
            });
        }
        let table = Self { depth, values };
        table.validate()?;
        Ok(table)
    }

    /// Builds the unique fair table with the given values at depth `log2(len)`.
    pub fn from_leaves(leaves: Vec<T>) -> Result<Self> {
        if !leaves.len().is_power_of_two() {
            return Err(Error::InvalidArgument("leaf count must be a power of two".into()));
        }
        let depth = leaves.len().trailing_zeros() as usize;
        let mut values = vec![T::zero(); (1 << (depth + 1)) - 1];
        let first_leaf = (1 << depth) - 1;
        for (i, v) in leaves.into_iter().enumerate() {
            values[first_leaf + i] = v;
        }
        let half = T::from_ratio(1, 2);
        for i in (0..first_leaf).rev() {
            values[i] = (values[2 * i + 1].clone() + values[2 * i + 2].clone()) * half.clone();
        }
        Self::new(depth, values)
    }

    /// `d(lambda) = root`; the left child gets the fraction `w(sigma)` of the
    /// doubled capital.
    pub fn from_splits(depth: usize, root: T, mut w: impl FnMut(&BitString) -> T) -> Result<Self> {
        let mut values = vec![T::zero(); (1 << (depth + 1)) - 1];
        values[0] = root;
        let two = T::from_ratio(2, 1);
        for len in 0..depth {
            for sigma in BitString::all_of_length(len) {
                let i = heap_index(&sigma);
                let ws = w(&sigma);
                let cap = values[i].clone() * two.clone();
                values[2 * i + 1] = cap.clone() * ws.clone();
                values[2 * i + 2] = cap * (T::one() - ws);
            }
        }
        Self::new(depth, values)
    }

    pub fn constant(depth: usize, v: T) -> Self {
        Self {
            depth,
            values: vec![v; (1 << (depth + 1)) - 1],
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn get(&self, sigma: &BitString) -> Result<&T> {
        if sigma.len() > self.depth {
            return Err(Error::DepthViolation {
                needed: sigma.len(),
                depth: self.depth,
            });
        }
        Ok(&self.values[heap_index(sigma)])
    }

    pub fn validate(&self) -> Result<()> {
        for len in 0..=self.depth {
            for sigma in BitString::all_of_length(len) {
                let i = heap_index(&sigma);
                if self.values[i].is_negative_value() {
                    return Err(Error::NegativeValue {
                        sigma: sigma.to_string(),
                    });
                }
                if len < self.depth {
                    let lhs = self.values[i].clone() + self.values[i].clone();
                    let rhs = self.values[2 * i + 1].clone() + self.values[2 * i + 2].clone();
                    if !T::close(&lhs, &rhs) {
                        return Err(Error::Unfair {
                            sigma: sigma.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Random table: root in `{1/4, ..., 2}`, splits in `{0, 1/16, ..., 1}`.
    pub fn random<R: Rng>(depth: usize, rng: &mut R) -> Self {
        let root = T::from_ratio(rng.gen_range(1..=8), 4);
        Self::from_splits(depth, root, |_| T::from_ratio(rng.gen_range(0..=16), 16))
            .expect("splits in [0, 1] give a fair table")
    }
}

impl MartingaleTable<Rational> {
    pub fn read(path: &Path) -> Result<Self> {
        let rows = parse_sigma_table(&std::fs::read_to_string(path)?)?;
        Self::from_rows(rows)
    }

    /// Rows must cover every string up to some depth exactly once.
    pub fn from_rows(mut rows: Vec<(BitString, Rational)>) -> Result<Self> {
        rows.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
        let depth = rows.last().map_or(0, |r| r.0.len());
        let complete = rows.len() == (1 << (depth + 1)) - 1
            && rows.iter().enumerate().all(|(i, (s, _))| heap_index(s) == i);
        if !complete {
            return Err(Error::Parse(
                "martingale table must list every string up to its depth once".into(),
            ));
        }
        Self::new(depth, rows.into_iter().map(|r| r.1).collect())
    }

    pub fn to_text(&self) -> String {
        let sigmas: Vec<BitString> = BitString::all_up_to(self.depth).collect();
        format_sigma_table(sigmas.iter().zip(&self.values))
    }
}

/// Extension length guaranteeing `k` cheap extensions:
/// `ceil(log2((k + 1) / (1 - 1/delta)))`.
pub fn space_lemma_length(delta: &Rational, k: u64) -> Result<u32> {
    let one = Rational::from_integer(1.into());
    if *delta <= one {
        return Err(Error::InvalidArgument("delta must exceed 1".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let k1 = Rational::from_integer((k + 1).into());
    Ok(ceil_log2(&(k1 * delta / (delta - one))))
}

/// Number of `tau` of length `l` with `d(sigma tau) < delta * d(sigma)`.
pub fn count_cheap_extensions<T: Scalar>(
    d: &MartingaleTable<T>,
    sigma: &BitString,
    delta: &T,
    l: usize,
) -> Result<u64> {
    if sigma.len() + l > d.depth() {
        return Err(Error::DepthViolation {
            needed: sigma.len() + l,
            depth: d.depth(),
        });
    }
    let bound = delta.clone() * d.get(sigma)?.clone();
    let mut count = 0;
    for tau in BitString::all_of_length(l) {
        if *d.get(&sigma.concat(&tau))? < bound {
            count += 1;
        }
    }
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpaceLemmaViolation {
    pub sigma: BitString,
    pub count: u64,
    pub l: u32,
}

/// Every `sigma` with room for `l` more bits and positive capital has at
/// least `k` cheap extensions. At zero capital nothing is strictly cheaper,
/// so those nodes are skipped.
pub fn space_lemma_violations<T: Scalar>(
    d: &MartingaleTable<T>,
    delta: &Rational,
    delta_t: &T,
    k: u64,
) -> Result<Vec<SpaceLemmaViolation>> {
    let l = space_lemma_length(delta, k)?;
    let mut out = Vec::new();
    if l as usize > d.depth() {
        return Ok(out);
    }
    for sigma in BitString::all_up_to(d.depth() - l as usize) {
        if *d.get(&sigma)? <= T::zero() {
            continue;
        }
        let count = count_cheap_extensions(d, &sigma, delta_t, l as usize)?;
        if count < k {
            out.push(SpaceLemmaViolation { sigma, count, l });
        }
    }
    Ok(out)
}

/// All fair tables with `d(lambda) = 1` whose depth-`depth` values are
/// multiples of `1/units`, one per multiset of leaf values (nonincreasing
/// leaves). Counting at the root depends only on that multiset.
pub fn dyadic_family(depth: usize, units: u64) -> Vec<MartingaleTable<Rational>> {
    let leaves = 1usize << depth;
    let total = leaves as u64 * units;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(leaves);
    partitions(total, total, leaves, &mut current, &mut |parts| {
        let mut v: Vec<Rational> = parts
            .iter()
            .map(|&p| Rational::new(p.into(), units.into()))
            .collect();
        v.resize(leaves, Rational::from_integer(0.into()));
        out.push(MartingaleTable::from_leaves(v).expect("leaves give a fair table"));
    });
    out
}

fn partitions(
    remaining: u64,
    max_part: u64,
    slots: usize,
    current: &mut Vec<u64>,
    emit: &mut dyn FnMut(&[u64]),
) {
    if remaining == 0 {
        emit(current);
        return;
    }
    if slots == 0 {
        return;
    }
    for p in (1..=max_part.min(remaining)).rev() {
        current.push(p);
        partitions(remaining - p, p, slots - 1, current, emit);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::scalar::rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lengths_from_formula() {
        assert_eq!(space_lemma_length(&rational(2, 1), 2).unwrap(), 3);
        assert_eq!(space_lemma_length(&rational(2, 1), 1).unwrap(), 2);
        // delta_1 = 2, k = 2^1
        assert_eq!(space_lemma_length(&rational(2, 1), 2).unwrap(), 3);
        assert!(space_lemma_length(&rational(1, 1), 2).is_err());
    }

    #[test]
    fn constant_table_all_cheap() {
        let d = MartingaleTable::constant(4, rational(1, 1));
        assert_eq!(count_cheap_extensions(&d, &bs(""), &rational(3, 2), 3).unwrap(), 8);
    }

    #[test]
    fn doubling_on_zeros() {
        let d = MartingaleTable::from_leaves(vec![
            rational(4, 1),
            rational(0, 1),
            rational(0, 1),
            rational(0, 1),
        ])
        .unwrap();
        assert_eq!(d.get(&bs("0")).unwrap(), &rational(2, 1));
        let l = space_lemma_length(&rational(2, 1), 1).unwrap() as usize;
        assert_eq!(count_cheap_extensions(&d, &bs(""), &rational(2, 1), l).unwrap(), 3);
    }

    #[test]
    fn unfair_rejected() {
        let v = vec![rational(1, 1), rational(1, 1), rational(2, 1)];
        assert_eq!(
            MartingaleTable::new(1, v),
            Err(Error::Unfair { sigma: String::new() })
        );
        let v = vec![rational(0, 1), rational(1, 1), rational(-1, 1)];
        assert!(MartingaleTable::new(1, v).is_err());
    }

    #[test]
    fn depth_violation() {
        let d = MartingaleTable::constant(2, rational(1, 1));
        assert!(count_cheap_extensions(&d, &bs("0"), &rational(2, 1), 2).is_err());
    }

    #[test]
    fn file_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d: MartingaleTable<Rational> = MartingaleTable::random(3, &mut rng);
        let rows = parse_sigma_table(&d.to_text()).unwrap();
        assert_eq!(MartingaleTable::from_rows(rows).unwrap(), d);
    }

    #[test]
    fn family_sizes() {
        // partitions of 4 into at most 4 parts
        assert_eq!(dyadic_family(2, 1).len(), 5);
        for d in dyadic_family(2, 2) {
            assert_eq!(d.get(&bs("")).unwrap(), &rational(1, 1));
        }
    }

    #[test]
    fn float_tables_also_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d: MartingaleTable<f64> = MartingaleTable::random(5, &mut rng);
        d.validate().unwrap();
        let v = space_lemma_violations(&d, &rational(2, 1), &2.0, 2).unwrap();
        assert!(v.is_empty());
    }

    #[test]
    fn family_has_no_violations_at_depth_three() {
        for d in dyadic_family(3, 2) {
            for (num, den) in [(3, 2), (2, 1), (3, 1)] {
                let delta = rational(num, den);
                for k in 1..=8 {
                    assert!(space_lemma_violations(&d, &delta, &delta, k).unwrap().is_empty());
                }
            }
        }
    }
}
