//! Closed-form exponents, bounds, and parameter constructions of the
//! first-moment analysis.

pub mod bounds;
pub mod boxprob;
pub mod counts;
pub mod covariance;
pub mod exponents;
pub mod special;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use bounds::*;
pub use boxprob::*;
pub use counts::*;
pub use covariance::*;
pub use exponents::*;
pub use special::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Negative,
    Nonnegative,
}

impl Verdict {
    pub fn of(value: f64) -> Self {
        if value < 0.0 {
            Verdict::Negative
        } else {
            Verdict::Nonnegative
        }
    }
}

/// Whether a value is a rate per unit `n` or an absolute base-2 exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    PerUnitN,
    Absolute,
}

/// A base-2 exponent with its term-by-term breakdown and the parameters that
/// produced it. Terms keep insertion order when serialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub kind: String,
    pub value: f64,
    pub scale: Scale,
    pub terms: IndexMap<String, f64>,
    pub params: IndexMap<String, f64>,
    pub verdict: Verdict,
}

impl ExponentReport {
    pub(crate) fn from_terms(
        kind: &str,
        scale: Scale,
        terms: &[(&str, f64)],
        params: &[(&str, f64)],
    ) -> Self {
        let value = terms.iter().map(|t| t.1).sum();
        Self {
            kind: kind.to_owned(),
            value,
            scale,
            terms: terms.iter().map(|&(k, v)| (k.to_owned(), v)).collect(),
            params: params.iter().map(|&(k, v)| (k.to_owned(), v)).collect(),
            verdict: Verdict::of(value),
        }
    }

    /// Sum of the breakdown, recomputed.
    pub fn terms_sum(&self) -> f64 {
        self.terms.values().sum()
    }

    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.get(name).copied()
    }
}
