//! Berry–Esseen anti-concentration for signed sums of i.i.d. entries.

use rayon::prelude::*;

use crate::error::{param, Result};
use crate::{rng, Disorder};

/// Rademacher anti-concentration constant: an interval of length
/// `2 C_U sqrt(M)` holds a signed sum with probability at most 1/4.
pub const C_U: f64 = 1.0 / 24.0;

/// Bernoulli(p) analogue of [`C_U`], `sqrt(p - p^2) / 24`.
pub fn c_u_bernoulli(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((p - p * p).sqrt() / 24.0)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return param(format!("p = {p} must lie in (0, 1)"));
    }
    Ok(())
}

/// `3 |I| / sqrt(M)` for Rademacher entries, `3 |I| / sqrt(M (p - p^2))` for
/// Bernoulli(p). Not capped at 1.
pub fn berry_esseen_bound(interval_length: f64, rows: usize, p: Option<f64>) -> Result<f64> {
    if rows == 0 {
        return param("M must be at least 1");
    }
    if !(interval_length >= 0.0) {
        return param("interval length must be nonnegative");
    }
    let var = match p {
        None => 1.0,
        Some(p) => {
            check_p(p)?;
            p - p * p
        }
    };
    Ok(3.0 * interval_length / (rows as f64 * var).sqrt())
}

/// Samples of `sum_i s_i X_i` with fixed signs `s` and i.i.d. entries `X_i`
/// (Rademacher or Bernoulli), sorted ascending.
pub fn signed_sum_samples(signs: &[i8], disorder: Disorder, trials: usize, seed: u64) -> Result<Vec<f64>> {
    disorder.validate()?;
    let m = signs.len() as u64;
    if m == 0 || signs.iter().any(|&s| s != 1 && s != -1) {
        return param("signs must be a nonempty +-1 vector");
    }
    let draw: Box<dyn Fn(u64) -> f64 + Sync> = match disorder {
        Disorder::Rademacher => Box::new(move |i| if rng::coin(seed, i, rng::domain::ANTICONC) { 1.0 } else { -1.0 }),
        Disorder::Bernoulli { p } => {
            Box::new(move |i| f64::from(u8::from(rng::uniform(seed, i, rng::domain::ANTICONC) < p)))
        }
        Disorder::Gaussian => {
            return Err(crate::Error::UnsupportedDisorder("signed sums need discrete entries".into()))
        }
    };
    let mut sums: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            signs
                .iter()
                .enumerate()
                .map(|(i, &s)| f64::from(s) * draw(t * m + i as u64))
                .sum()
        })
        .collect();
    sums.sort_by(f64::total_cmp);
    Ok(sums)
}

/// Fraction of sorted samples in the closed interval `[lo, hi]`.
pub fn interval_frequency(sorted: &[f64], lo: f64, hi: f64) -> f64 {
    if sorted.is_empty() || hi < lo {
        return 0.0;
    }
    let a = sorted.partition_point(|&x| x < lo);
    let b = sorted.partition_point(|&x| x <= hi);
    (b - a) as f64 / sorted.len() as f64
}
