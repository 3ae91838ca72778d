use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{param, Error, Result};

/// A vector in {-1, +1}^n. Displays and serializes as a string of `+`/`-`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if let Some(pos) = signs.iter().position(|&s| s != 1 && s != -1) {
            return param(format!("coordinate {pos} is {}, not +-1", signs[pos]));
        }
        Ok(Self(signs))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Bit `i` of `mask` set means coordinate `i` is -1.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        Self((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    /// Inverse of [`SignVector::from_mask`]; panics past 64 coordinates.
    pub fn to_mask(&self) -> u64 {
        assert!(self.0.len() <= 64, "mask form needs n <= 64");
        self.0
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &s)| if s < 0 { m | 1 << i } else { m })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }

    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.len(), other.len(), "length mismatch");
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// n^{-1} <self, other>, computed as 1 - 2 d_H / n.
    pub fn overlap(&self, other: &Self) -> f64 {
        overlap_from_hamming(self.hamming(other), self.len())
    }
}

#[inline]
pub fn overlap_from_hamming(d: usize, n: usize) -> f64 {
    1.0 - 2.0 * d as f64 / n as f64
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => param(format!("unexpected character {other:?} in sign string")),
            })
            .collect::<Result<Vec<i8>>>()
            .map(Self)
    }
}

impl Serialize for SignVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SignVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_zero() {
        assert!(SignVector::new(vec![1, 0, -1]).is_err());
    }

    #[test]
    fn display_and_parse() {
        let s = SignVector::new(vec![1, -1, -1, 1]).unwrap();
        assert_eq!(s.to_string(), "+--+");
        assert_eq!("+--+".parse::<SignVector>().unwrap(), s);
        assert!("+0".parse::<SignVector>().is_err());
        assert_eq!(serde_json::to_string(&s).unwrap(), "\"+--+\"");
    }

    proptest! {
        #[test]
        fn mask_round_trip(mask in any::<u32>(), n in 1usize..=32) {
            let mask = u64::from(mask) & ((1u64 << n) - 1);
            prop_assert_eq!(SignVector::from_mask(mask, n).to_mask(), mask);
        }

        #[test]
        fn overlap_matches_inner_product(a in any::<u64>(), b in any::<u64>(), n in 1usize..=64) {
            let (x, y) = (SignVector::from_mask(a, n), SignVector::from_mask(b, n));
            let ip: i64 = x.as_slice().iter().zip(y.as_slice()).map(|(&p, &q)| i64::from(p * q)).sum();
            let o = x.overlap(&y);
            prop_assert!((o - ip as f64 / n as f64).abs() < 1e-15);
            prop_assert!((-1.0..=1.0).contains(&o));
        }
    }
}
