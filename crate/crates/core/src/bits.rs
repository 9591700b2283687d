//! Finite binary strings.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A finite binary string. The empty string is permitted.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self { bits: Vec::new() }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    /// All strings of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "length {len} too large to enumerate");
        (0u64..(1u64 << len)).map(move |v| BitString::from_u64(v, len))
    }

    /// All strings of length at most `max_len`, length-lexicographic.
    pub fn all_up_to(max_len: usize) -> impl Iterator<Item = BitString> {
        (0..=max_len).flat_map(BitString::all_of_length)
    }

    /// The `len` low bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let bits = (0..len).rev().map(|i| (value >> i) & 1 == 1).collect();
        Self { bits }
    }

    /// Binary expansion without leading zeros; `bin(0)` is the empty string.
    pub fn binary_expansion(n: u64) -> Self {
        if n == 0 {
            return Self::new();
        }
        let len = 64 - n.leading_zeros() as usize;
        Self::from_u64(n, len)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn push(&mut self, b: bool) {
        self.bits.push(b);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn with_bit(&self, b: bool) -> BitString {
        let mut out = self.clone();
        out.push(b);
        out
    }

    pub fn prefix(&self, n: usize) -> BitString {
        BitString {
            bits: self.bits[..n].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && other.bits[..self.len()] == self.bits[..]
    }

    /// Value of the bits read as a big-endian binary numeral.
    pub fn value(&self) -> BigUint {
        let mut v = BigUint::zero();
        for &b in &self.bits {
            v <<= 1u32;
            if b {
                v += 1u32;
            }
        }
        v
    }

    /// Rank in the length-lexicographic order: `2^len - 1 + value`.
    pub fn rank(&self) -> BigUint {
        (BigUint::one() << self.len()) - 1u32 + self.value()
    }

    /// Inverse of [`BitString::rank`].
    pub fn from_rank(rank: &BigUint) -> BitString {
        let shifted = rank + 1u32;
        let len = shifted.bits() as usize - 1;
        let value = shifted - (BigUint::one() << len);
        let mut bits = vec![false; len];
        for (i, slot) in bits.iter_mut().enumerate() {
            *slot = value.bit((len - 1 - i) as u64);
        }
        BitString { bits }
    }

    /// Hex of the bits packed most-significant first, zero-padded to a nibble.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.len().div_ceil(4));
        for chunk in self.bits.chunks(4) {
            let mut nib = 0u8;
            for i in 0..4 {
                nib <<= 1;
                if chunk.get(i).copied().unwrap_or(false) {
                    nib |= 1;
                }
            }
            out.push(char::from_digit(nib as u32, 16).unwrap());
        }
        out
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString, Error> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(BitString {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitString { bits })
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<&[bool]> for BitString {
    fn from(bits: &[bool]) -> Self {
        BitString {
            bits: bits.to_vec(),
        }
    }
}

/// Shorthand for literals in tests and examples; panics on bad input.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("bit literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rank_of_small_strings() {
        assert_eq!(bs("").rank(), BigUint::from(0u32));
        assert_eq!(bs("0").rank(), BigUint::from(1u32));
        assert_eq!(bs("1").rank(), BigUint::from(2u32));
        assert_eq!(bs("00").rank(), BigUint::from(3u32));
        assert_eq!(bs("010011").rank(), BigUint::from(82u32));
    }

    #[test]
    fn binary_expansion_drops_leading_zeros() {
        assert!(BitString::binary_expansion(0).is_empty());
        assert_eq!(BitString::binary_expansion(6), bs("110"));
    }

    #[test]
    fn hex_pads_last_nibble() {
        assert_eq!(bs("001000001").to_hex(), "208");
        assert_eq!(bs("").to_hex(), "");
    }

    proptest! {
        #[test]
        fn rank_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..80)) {
            let s = BitString::from_bits(bits);
            prop_assert_eq!(BitString::from_rank(&s.rank()), s);
        }
    }
}
