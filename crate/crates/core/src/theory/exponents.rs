//! Capacity, free-energy exponents, and the parameter choices that make them
//! negative.

use serde::{Deserialize, Serialize};

use super::special::{binary_entropy, central_mass, inverse_binary_entropy};
use super::{ExponentReport, Scale};
use crate::error::{param, Result};

const LOG2_2PI: f64 = 2.651_496_129_472_318_8;

/// Storage capacity `-1 / log2 P[|Z| <= kappa]`.
pub fn alpha_c(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return param(format!("kappa = {kappa} must be positive and finite"));
    }
    Ok(-1.0 / central_mass(kappa).log2())
}

fn check_sbp(delta: f64, alpha: f64, kappa: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return param(format!("delta = {delta} must lie in (0, 1/2)"));
    }
    if !(alpha > 0.0) {
        return param(format!("alpha = {alpha} must be positive"));
    }
    if !(kappa > 0.0) {
        return param(format!("kappa = {kappa} must be positive"));
    }
    Ok(())
}

/// Per-unit-`n` exponent of the expected number of `m`-tuples of SBP
/// solutions whose members agree outside a `delta n` suffix.
///
/// The first two terms count tuples; the rest are the log box probability of
/// the equicorrelated covariance `delta I + (1 - delta) 11^T`.
pub fn psi_sbp(delta: f64, m: usize, alpha: f64, kappa: f64) -> Result<ExponentReport> {
    check_sbp(delta, alpha, kappa)?;
    if m < 1 {
        return param("m must be at least 1");
    }
    let mf = m as f64;
    Ok(ExponentReport::from_terms(
        "psi_sbp",
        Scale::PerUnitN,
        &[
            ("base", 1.0),
            ("suffix_count", mf * delta),
            ("gaussian_norm", -alpha * mf / 2.0 * LOG2_2PI),
            ("box_volume", alpha * mf * (2.0 * kappa).log2()),
            ("det_small", -alpha * (mf - 1.0) / 2.0 * delta.log2()),
            ("det_large", -alpha / 2.0 * (delta + (1.0 - delta) * mf).log2()),
        ],
        &[("delta", delta), ("m", mf), ("alpha", alpha), ("kappa", kappa)],
    ))
}

/// Large-`m` slope of [`psi_sbp`] per additional member.
pub fn upsilon(delta: f64, alpha: f64, kappa: f64) -> Result<f64> {
    check_sbp(delta, alpha, kappa)?;
    Ok(delta - alpha / 2.0 * LOG2_2PI + alpha * (2.0 * kappa).log2() - alpha / 2.0 * delta.log2())
}

/// Which multiplicity multiplies the entropy term of [`psi_disc`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountingForm {
    /// `m n h_b(.)`, as written in the free-energy display.
    #[default]
    FreeEnergy,
    /// `(m - 1) n h_b(.)`, as in the tuple-counting lemma.
    Lemma,
}

impl std::str::FromStr for CountingForm {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free-energy" | "free_energy" => Ok(CountingForm::FreeEnergy),
            "lemma" => Ok(CountingForm::Lemma),
            other => param(format!("unknown counting form {other:?}")),
        }
    }
}

/// Inputs of [`psi_disc`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscExponentParams {
    pub m: usize,
    pub beta: f64,
    pub eta: f64,
    pub c: f64,
    pub n: f64,
    /// Number of rows.
    pub rows: f64,
    pub k: f64,
    #[serde(default)]
    pub form: CountingForm,
}

/// Absolute base-2 exponent of the expected number of ensemble-OGP tuples
/// for discrepancy at level `K / sqrt(n)` with `c n` rows allowed to fail.
pub fn psi_disc(p: &DiscExponentParams) -> Result<ExponentReport> {
    let DiscExponentParams { m, beta, eta, c, n, rows, k, form } = *p;
    if !(0.0 < eta && eta < beta && beta < 1.0) {
        return param(format!("need 0 < eta < beta < 1, got eta = {eta}, beta = {beta}"));
    }
    if m < 2 {
        return param("m must be at least 2");
    }
    if !(n > 0.0 && rows > 0.0 && k > 0.0) {
        return param("n, M, and K must be positive");
    }
    if !(c >= 0.0) {
        return param(format!("c = {c} must be nonnegative"));
    }
    let mf = m as f64;
    let mult = match form {
        CountingForm::FreeEnergy => mf,
        CountingForm::Lemma => mf - 1.0,
    };
    let hb = binary_entropy((1.0 - beta + eta) / 2.0)?;
    Ok(ExponentReport::from_terms(
        "psi_disc",
        Scale::Absolute,
        &[
            ("base", n),
            ("overlap_count", mult * n * hb),
            ("failed_rows", c * mf * n),
            (
                "box_width",
                mf * rows / 2.0 * (4.0 * k * k / (std::f64::consts::PI * (1.0 - beta))).log2(),
            ),
            ("box_scale", -(rows * mf / 2.0) * n.log2()),
        ],
        &[
            ("m", mf),
            ("beta", beta),
            ("eta", eta),
            ("c", c),
            ("n", n),
            ("M", rows),
            ("K", k),
        ],
    ))
}

/// OGP parameters `(m*, beta*, eta*, c*)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OgpParams {
    pub m: usize,
    pub beta: f64,
    pub eta: f64,
    pub c: f64,
}

/// Bisection tolerance for inverting the binary entropy.
pub const ENTROPY_TOL: f64 = 1e-12;

/// Parameter choice for aspect ratios `n / (M log2 M)` in `[c2, C1]`.
///
/// `m* = max{2, ceil(16 C1)}`; `beta*` is the root above 1/2 of
/// `h_b(1 - beta) = min{1/(4 C1), 1/2}`; `eta* = (1 - beta*) / (2 m*)`;
/// `c* = 1 / m*`.
pub fn find_ogp_params(c1: f64, c2: f64, k: f64) -> Result<OgpParams> {
    if !(c1 > c2 && c2 > 0.0) || !c1.is_finite() {
        return param(format!("need C1 > c2 > 0, got C1 = {c1}, c2 = {c2}"));
    }
    if !(k > 0.0) {
        return param(format!("K = {k} must be positive"));
    }
    let m = (16.0 * c1).ceil().max(2.0) as usize;
    let target = (1.0 / (4.0 * c1)).min(0.5);
    let beta = 1.0 - inverse_binary_entropy(target, ENTROPY_TOL)?;
    let eta = (1.0 - beta) / (2.0 * m as f64);
    Ok(OgpParams { m, beta, eta, c: 1.0 / m as f64 })
}

/// Stability constants `C`, `Q`, and `T` (as `log2 log2 T`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableConstants {
    pub c: f64,
    pub q: f64,
    pub log2_log2_t: f64,
}

pub fn stable_constants(eta: f64, lipschitz: f64, m: usize) -> Result<StableConstants> {
    if !(eta > 0.0 && eta < 1.0) {
        return param(format!("eta = {eta} must lie in (0, 1)"));
    }
    if !(lipschitz > 0.0) {
        return param(format!("L = {lipschitz} must be positive"));
    }
    if m < 2 {
        return param("m must be at least 2");
    }
    let q = 4800.0 * lipschitz * std::f64::consts::PI / (eta * eta);
    Ok(StableConstants {
        c: eta * eta / 1600.0,
        q,
        log2_log2_t: 4.0 * m as f64 * q * q.log2(),
    })
}
