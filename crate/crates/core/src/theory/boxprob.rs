//! Centered Gaussian box probabilities `P[max_i |Z_i| <= h]`.
//!
//! Three routes are provided: the density bound `(2 pi)^{-m/2} |Sigma|^{-1/2}
//! (2h)^m`, deterministic quadrature (one-dimensional for nonnegative
//! equicorrelation, nested over Cholesky coordinates for `m <= 3`), and a
//! counter-keyed Monte Carlo estimator whose output does not depend on how
//! samples are split across threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::covariance::{cholesky, CovarianceSpec, Matrix};
use super::special::{central_mass, integrate, normal_interval, normal_pdf};
use crate::error::{param, Result};
use crate::rng;

/// Largest dimension handled by nested quadrature.
pub const QUADRATURE_MAX_DIM: usize = 3;
pub const MC_MIN_SAMPLES: u64 = 10_000;
const MC_CHUNK: u64 = 1 << 14;
const TAIL: f64 = 10.0;

/// Analytic upper bound on the box probability under a PD covariance.
pub fn box_density_bound(cov: &Matrix, half_width: f64) -> Result<f64> {
    let l = cholesky(cov, false)?;
    let m = cov.dim();
    let sqrt_det: f64 = (0..m).map(|i| l[(i, i)]).product();
    let mf = m as f64;
    Ok((2.0 * std::f64::consts::PI).powf(-mf / 2.0) / sqrt_det * (2.0 * half_width).powi(m as i32))
}

/// Density bound for `Sigma(eta)` with half-width `K / sqrt(n)`.
pub fn gaussian_box_bound(spec: &CovarianceSpec, k: f64, n: f64) -> Result<f64> {
    spec.validate()?;
    if !(k > 0.0 && n > 0.0) {
        return param("K and n must be positive");
    }
    box_density_bound(&spec.materialize(), k / n.sqrt())
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// `P[max_i |Z_i| <= h]` for `Z ~ N(0, cov)` by sampling `Z = L X`.
///
/// Singular (positive semidefinite) covariances are accepted: a zero pivot
/// makes the corresponding coordinate a deterministic combination of the
/// earlier ones.
pub fn mc_box_probability(cov: &Matrix, half_width: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < MC_MIN_SAMPLES {
        return param(format!("at least {MC_MIN_SAMPLES} samples required"));
    }
    if !(half_width > 0.0) {
        return param("half-width must be positive");
    }
    if !cov.is_symmetric() {
        return param("covariance must be symmetric");
    }
    let l = cholesky(cov, true)?;
    let m = cov.dim();
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut x = vec![0.0; m];
            let mut hits = 0u64;
            for s in c * MC_CHUNK..((c + 1) * MC_CHUNK).min(samples) {
                for (d, xd) in x.iter_mut().enumerate() {
                    *xd = rng::vector_normal(seed, rng::domain::BOX_SAMPLE, s, d);
                }
                let inside = (0..m).all(|i| {
                    let z: f64 = (0..=i).map(|k| l[(i, k)] * x[k]).sum();
                    z.abs() <= half_width
                });
                hits += u64::from(inside);
            }
            hits
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(McEstimate { estimate: p, std_error: (p * (1.0 - p) / samples as f64).sqrt(), samples })
}

/// Exact box probability for unit-variance equicorrelation `rho in [0, 1]`,
/// via `Z_i = sqrt(rho) W + sqrt(1 - rho) E_i`.
pub fn equicorrelated_box_probability(m: usize, rho: f64, half_width: f64) -> Result<f64> {
    if m == 0 {
        return param("dimension must be positive");
    }
    if !(0.0..=1.0).contains(&rho) {
        return param(format!("rho = {rho} outside [0, 1] for the one-dimensional route"));
    }
    if !(half_width > 0.0) {
        return param("half-width must be positive");
    }
    if half_width.is_infinite() {
        return Ok(1.0);
    }
    if m == 1 || rho == 1.0 {
        return Ok(central_mass(half_width));
    }
    if rho == 0.0 {
        return Ok(central_mass(half_width).powi(m as i32));
    }
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    // the bracket is negligible once |a w| exceeds h by many multiples of b
    let reach = (half_width + TAIL * b) / a;
    let (lo, hi) = (-reach.min(TAIL), reach.min(TAIL));
    let f = |w: f64| {
        let inner = normal_interval((-half_width - a * w) / b, (half_width - a * w) / b);
        normal_pdf(w) * inner.powi(m as i32)
    };
    Ok(integrate(f, lo, hi, 128))
}

/// Box probability by nested Gauss–Legendre quadrature over the Cholesky
/// coordinates; the innermost coordinate is integrated in closed form.
pub fn quadrature_box_probability(cov: &Matrix, half_width: f64) -> Result<f64> {
    let m = cov.dim();
    if m == 0 || m > QUADRATURE_MAX_DIM {
        return param(format!("quadrature supports 1..={QUADRATURE_MAX_DIM} dimensions, got {m}"));
    }
    if !(half_width > 0.0) {
        return param("half-width must be positive");
    }
    let l = cholesky(cov, false)?;
    let mut x = vec![0.0; m];
    Ok(nested(&l, half_width, 0, &mut x))
}

fn nested(l: &Matrix, h: f64, dim: usize, x: &mut Vec<f64>) -> f64 {
    let shift: f64 = (0..dim).map(|k| l[(dim, k)] * x[k]).sum();
    let d = l[(dim, dim)];
    let lo = ((-h - shift) / d).max(-TAIL);
    let hi = ((h - shift) / d).min(TAIL);
    if dim + 1 == l.dim() {
        return normal_interval(lo, hi);
    }
    if hi <= lo {
        return 0.0;
    }
    integrate(
        |t| {
            x[dim] = t;
            normal_pdf(t) * nested(l, h, dim + 1, x)
        },
        lo,
        hi,
        24,
    )
}

/// Box probability for an arbitrary covariance: closed form for `m = 1`,
/// the one-dimensional route for nonnegative equicorrelation, nested
/// quadrature up to `m = 3`, Monte Carlo beyond.
pub fn box_probability(cov: &Matrix, half_width: f64, mc_samples: u64, seed: u64) -> Result<(f64, BoxMethod)> {
    let m = cov.dim();
    if let Some(rho) = equicorrelation(cov) {
        if rho >= 0.0 {
            return Ok((equicorrelated_box_probability(m, rho, half_width)?, BoxMethod::Quadrature));
        }
    }
    if m <= QUADRATURE_MAX_DIM {
        return Ok((quadrature_box_probability(cov, half_width)?, BoxMethod::Quadrature));
    }
    let est = mc_box_probability(cov, half_width, mc_samples, seed)?;
    Ok((est.estimate, BoxMethod::MonteCarlo { samples: est.samples, std_error: est.std_error }))
}

fn equicorrelation(cov: &Matrix) -> Option<f64> {
    let m = cov.dim();
    if (0..m).any(|i| cov[(i, i)] != 1.0) {
        return None;
    }
    if m == 1 {
        return Some(0.0);
    }
    let rho = cov[(0, 1)];
    (0..m)
        .all(|i| (0..m).all(|j| i == j || cov[(i, j)] == rho))
        .then_some(rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BoxMethod {
    Quadrature,
    MonteCarlo { samples: u64, std_error: f64 },
}
