use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::bits::BitString;
use crate::complexity::Engine;
use crate::scalar::Rational;
use crate::semimeasure::m_stage_all;

/// A betting function approximated from below in stages, with
/// `2 d_s(sigma) >= d_s(sigma 0) + d_s(sigma 1)`.
pub trait StagedSupermartingale: Sync {
    fn at(&self, sigma: &BitString, stage: u64) -> Rational;
}

/// Desk-scale stand-in for a universal martingale: half of the capital
/// follows the measure induced by `m_s` on cylinders, half is spread over
/// periodic-pattern bettors with weights `2^-(i+1)`.
pub struct UniversalMixture<'a> {
    pub engine: &'a Engine,
    pub max_components: usize,
}

impl<'a> UniversalMixture<'a> {
    pub fn new(engine: &'a Engine, max_components: usize) -> Self {
        Self {
            engine,
            max_components,
        }
    }

    /// Pattern bettors enumerated by stage `s`.
    pub fn components_at(&self, s: u64) -> usize {
        ((64 - (s + 1).leading_zeros()) as usize - 1).min(self.max_components)
    }

    pub fn freeze(&self, s: u64) -> FrozenMixture {
        FrozenMixture {
            stage: s,
            components: self.components_at(s),
            support: m_stage_all(self.engine, s, None).into_iter().collect(),
        }
    }
}

impl StagedSupermartingale for UniversalMixture<'_> {
    fn at(&self, sigma: &BitString, stage: u64) -> Rational {
        self.freeze(stage).value(sigma)
    }
}

/// The mixture at one stage, with the semimeasure support cached.
#[derive(Clone, Debug)]
pub struct FrozenMixture {
    pub stage: u64,
    pub components: usize,
    support: Vec<(BitString, Rational)>,
}

impl FrozenMixture {
    pub fn value(&self, sigma: &BitString) -> Rational {
        let half = Rational::new(1.into(), 2.into());
        let mut bets = Rational::zero();
        for i in 0..self.components {
            bets += pattern_bet(i, sigma) / pow2(i + 1);
        }
        (self.measure_part(sigma) + bets) * half
    }

    /// `2^|sigma| nu(sigma)`, where `nu` spreads the mass of each `tau`
    /// uniformly over the cylinder of `tau`.
    pub fn measure_part(&self, sigma: &BitString) -> Rational {
        let mut v = Rational::zero();
        for (tau, m) in &self.support {
            if sigma.is_prefix_of(tau) {
                v += m * pow2(sigma.len());
            } else if tau.is_prefix_of(sigma) {
                v += m * pow2(tau.len());
            }
        }
        v
    }
}

fn pow2(n: usize) -> Rational {
    Rational::from_integer(BigInt::one() << n)
}

/// Bets 3/4 of its capital on the next bit of the repeated pattern
/// `bitstring_of_rank(i + 1)`.
pub fn pattern_bet(i: usize, sigma: &BitString) -> Rational {
    let pattern = BitString::from_rank(&(i as u64 + 1).into());
    let hits = (0..sigma.len())
        .filter(|&j| sigma.bit(j) == pattern.bit(j % pattern.len()))
        .count();
    Rational::new(BigInt::from(3).pow(hits as u32), BigInt::one() << sigma.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;

    #[test]
    fn pattern_bet_is_fair() {
        for i in 0..6 {
            for sigma in BitString::all_up_to(5) {
                let two = Rational::from_integer(2.into());
                assert_eq!(
                    pattern_bet(i, &sigma) * two,
                    pattern_bet(i, &sigma.with_bit(false)) + pattern_bet(i, &sigma.with_bit(true))
                );
            }
        }
        assert_eq!(pattern_bet(0, &bs("00")), Rational::new(9.into(), 4.into()));
    }

    #[test]
    fn mixture_fair_and_monotone() {
        let e = Engine::new(14);
        let u = UniversalMixture::new(&e, 8);
        let lo = u.freeze(50);
        let hi = u.freeze(500);
        for sigma in BitString::all_up_to(6) {
            let two = Rational::from_integer(2.into());
            assert!(
                lo.value(&sigma) * two
                    >= lo.value(&sigma.with_bit(false)) + lo.value(&sigma.with_bit(true))
            );
            assert!(lo.value(&sigma) <= hi.value(&sigma), "{sigma}");
        }
        assert!(hi.value(&BitString::new()) <= Rational::one());
    }
}
