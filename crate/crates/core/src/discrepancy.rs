//! Discrepancy evaluation, exact minimization, and perceptron solution sets.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::gray::{inf_norm, Columns};
use crate::{Disorder, Instance, SignVector};

pub const DEFAULT_EXACT_MAX_N: usize = 30;
pub const DEFAULT_ENUMERATE_MAX_N: usize = 26;
/// Hard ceiling imposed by the 64-bit mask encoding of the walk.
const MASK_LIMIT: usize = 63;

/// `|M sigma|_inf` together with the signs and row sums that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub argmin: SignVector,
    pub row_sums: Vec<f64>,
}

fn check_len(inst: &Instance, sigma: &SignVector) -> Result<()> {
    if sigma.len() != inst.cols() {
        return param(format!(
            "sign vector has length {}, instance has {} columns",
            sigma.len(),
            inst.cols()
        ));
    }
    Ok(())
}

fn check_capacity(n: usize, max_n: usize) -> Result<()> {
    if max_n > MASK_LIMIT {
        return param(format!("max_n = {max_n} exceeds the supported {MASK_LIMIT}"));
    }
    if n > max_n {
        return Err(Error::Capacity { n, max_n });
    }
    Ok(())
}

/// Row sums `M sigma` and their sup norm.
pub fn disc_value(inst: &Instance, sigma: &SignVector) -> Result<DiscrepancyResult> {
    check_len(inst, sigma)?;
    let signs = sigma.as_slice();
    let row_sums: Vec<f64> = (0..inst.rows())
        .map(|r| {
            signs
                .iter()
                .enumerate()
                .map(|(c, &s)| f64::from(s) * inst.get(r, c))
                .sum()
        })
        .collect();
    Ok(DiscrepancyResult { value: inf_norm(&row_sums), argmin: sigma.clone(), row_sums })
}

/// Global minimum of `|M sigma|_inf` by exhaustive Gray-code enumeration.
///
/// Ties resolve to the earliest minimizer in walk order, independent of how
/// the walk is split across threads.
pub fn exact_discrepancy(inst: &Instance, max_n: usize) -> Result<DiscrepancyResult> {
    check_capacity(inst.cols(), max_n)?;
    let cols = Columns::new(inst);
    let best = cols
        .par_chunks(|a, b| {
            let mut best = (f64::INFINITY, 0u64);
            cols.walk(a, b, |_, mask, sums| {
                let v = inf_norm(sums);
                if v < best.0 {
                    best = (v, mask);
                }
            });
            best
        })
        .into_iter()
        .fold((f64::INFINITY, 0u64), |acc, c| if c.0 < acc.0 { c } else { acc });
    disc_value(inst, &SignVector::from_mask(best.1, inst.cols()))
}

fn check_sbp(inst: &Instance, kappa: f64) -> Result<()> {
    if !(kappa > 0.0) {
        return param(format!("kappa = {kappa} must be positive"));
    }
    if inst.disorder() != Disorder::Gaussian {
        return Err(Error::UnsupportedDisorder(
            "the symmetric binary perceptron uses gaussian patterns".into(),
        ));
    }
    Ok(())
}

/// Perceptron threshold `kappa * sqrt(n)`.
pub fn sbp_threshold(kappa: f64, n: usize) -> f64 {
    kappa * (n as f64).sqrt()
}

/// Whether every row satisfies `|<row, sigma>| <= kappa sqrt(n)` (inclusive).
pub fn sbp_membership(inst: &Instance, sigma: &SignVector, kappa: f64) -> Result<bool> {
    check_sbp(inst, kappa)?;
    Ok(disc_value(inst, sigma)?.value <= sbp_threshold(kappa, inst.cols()))
}

/// Every sign vector with `|M sigma|_inf <= threshold`, as masks (bit set =
/// -1). Each half-walk hit is emitted with its global flip right after it.
pub fn enumerate_masks_within(inst: &Instance, threshold: f64, max_n: usize) -> Result<Vec<u64>> {
    check_capacity(inst.cols(), max_n)?;
    let cols = Columns::new(inst);
    let full = if inst.cols() == 64 { u64::MAX } else { (1u64 << inst.cols()) - 1 };
    Ok(cols
        .par_chunks(|a, b| {
            let mut hits = Vec::new();
            cols.walk(a, b, |_, mask, sums| {
                if inf_norm(sums) <= threshold {
                    hits.push(mask);
                    hits.push(!mask & full);
                }
            });
            hits
        })
        .into_iter()
        .flatten()
        .collect())
}

/// `|{sigma : |M sigma|_inf <= threshold}|` without materializing the set.
pub fn count_within(inst: &Instance, threshold: f64, max_n: usize) -> Result<u64> {
    check_capacity(inst.cols(), max_n)?;
    let cols = Columns::new(inst);
    Ok(cols
        .par_chunks(|a, b| {
            let mut hits = 0u64;
            cols.walk(a, b, |_, _, sums| {
                if inf_norm(sums) <= threshold {
                    hits += 2;
                }
            });
            hits
        })
        .into_iter()
        .sum())
}

/// Like [`enumerate_masks_within`] but returning sign vectors.
pub fn enumerate_within(inst: &Instance, threshold: f64, max_n: usize) -> Result<Vec<SignVector>> {
    let n = inst.cols();
    Ok(enumerate_masks_within(inst, threshold, max_n)?
        .into_iter()
        .map(|m| SignVector::from_mask(m, n))
        .collect())
}

/// The complete perceptron solution set `{sigma : |M sigma|_inf <= kappa sqrt(n)}`.
pub fn enumerate_solutions(inst: &Instance, kappa: f64, max_n: usize) -> Result<Vec<SignVector>> {
    check_sbp(inst, kappa)?;
    enumerate_within(inst, sbp_threshold(kappa, inst.cols()), max_n)
}
