//! First-moment counts: expected numbers of solution tuples.

use serde::{Deserialize, Serialize};

use super::boxprob::{box_probability, equicorrelated_box_probability, BoxMethod};
use super::covariance::Matrix;
use super::special::binary_entropy;
use crate::error::{param, Result};

/// Expected tuple count with its factors in log scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleCount {
    pub value: f64,
    pub log2_value: f64,
    /// `log2` of the number of tuples, or of its bound.
    pub log2_count: f64,
    /// Per-row box probability.
    pub p_box: f64,
    pub method: BoxMethod,
    /// False when the counting factor is only a bound.
    pub exact: bool,
}

impl TupleCount {
    fn new(log2_count: f64, p_box: f64, rows: usize, method: BoxMethod, exact: bool) -> Self {
        let log2_value = log2_count + rows as f64 * p_box.log2();
        Self { value: log2_value.exp2(), log2_value, log2_count, p_box, method, exact }
    }
}

/// `E |Xi|` for `m`-tuples of SBP solutions on a suffix ensemble that share
/// the first `n - k` coordinates: `2^{n + k(m-1)} P_box^M`, with `P_box` the
/// box probability of half-width `kappa` under the equicorrelated covariance
/// with off-diagonal `1 - k/n`. Every tuple has that covariance, so the
/// value is exact.
pub fn expected_xi_count(n: usize, rows: usize, k: usize, m: usize, kappa: f64) -> Result<TupleCount> {
    if n == 0 || m == 0 || rows == 0 {
        return param("n, M, and m must be positive");
    }
    if k > n {
        return param(format!("suffix length {k} exceeds n = {n}"));
    }
    if !(kappa > 0.0) {
        return param(format!("kappa = {kappa} must be positive"));
    }
    let rho = 1.0 - k as f64 / n as f64;
    let p_box = equicorrelated_box_probability(m, rho, kappa)?;
    let log2_count = (n + k * (m - 1)) as f64;
    Ok(TupleCount::new(log2_count, p_box, rows, BoxMethod::Quadrature, true))
}

/// Inputs of [`expected_tuple_count_general`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralCountParams {
    pub n: usize,
    pub rows: usize,
    pub m: usize,
    /// Common pairwise Hamming distance.
    pub delta: usize,
    /// Discrepancy level; the box half-width is `K / sqrt(n)`.
    pub k: f64,
    /// Monte Carlo settings, used only when `m > 3` and the correlation is negative.
    pub mc_samples: u64,
    pub seed: u64,
}

/// First-moment estimate for `m`-tuples at common pairwise Hamming distance
/// `delta`: the entropy bound `2^{n + n(m-1) h_b(delta/n)}` on their number
/// times `P_box^M` under the equicorrelated covariance with off-diagonal
/// `1 - 2 delta / n`. The counting factor is a bound, so the result is an
/// upper-bound-style estimate.
pub fn expected_tuple_count_general(p: &GeneralCountParams) -> Result<TupleCount> {
    let GeneralCountParams { n, rows, m, delta, k, mc_samples, seed } = *p;
    if n == 0 || m == 0 || rows == 0 {
        return param("n, M, and m must be positive");
    }
    if delta > n {
        return param(format!("Hamming distance {delta} exceeds n = {n}"));
    }
    if !(k > 0.0) {
        return param(format!("K = {k} must be positive"));
    }
    let nf = n as f64;
    let log2_count = nf + nf * (m - 1) as f64 * binary_entropy(delta as f64 / nf)?;
    let half_width = k / nf.sqrt();
    // identical members collapse to a single coordinate
    if delta == 0 || m == 1 {
        let p_box = equicorrelated_box_probability(1, 0.0, half_width)?;
        return Ok(TupleCount::new(log2_count, p_box, rows, BoxMethod::Quadrature, false));
    }
    let rho = 1.0 - 2.0 * delta as f64 / nf;
    // eigenvalues are 1 - rho (m - 1 times) and 1 + (m - 1) rho
    let smallest = (1.0 - rho).min(1.0 + (m - 1) as f64 * rho);
    if smallest <= 0.0 {
        return Err(crate::Error::NotPositiveDefinite { index: m - 1, pivot: smallest });
    }
    let (p_box, method) = box_probability(&Matrix::equicorrelated(m, rho), half_width, mc_samples, seed)?;
    Ok(TupleCount::new(log2_count, p_box, rows, method, false))
}
