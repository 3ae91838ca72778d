//! Overlap covariance matrices `Sigma(eta)` and the linear algebra they need.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Pivot tolerance for positive-definiteness decisions.
pub const PD_TOL: f64 = 1e-12;

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return param("matrix rows must form a square");
        }
        Ok(Self { n, data: rows.concat() })
    }

    /// Unit diagonal, every off-diagonal entry `rho`.
    pub fn equicorrelated(n: usize, rho: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if i == j { 1.0 } else { rho };
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower Cholesky factor. With `semidefinite`, pivots within `PD_TOL` of zero
/// zero out their column instead of failing.
pub fn cholesky(a: &Matrix, semidefinite: bool) -> Result<Matrix> {
    let n = a.dim();
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= PD_TOL {
            if semidefinite && d >= -PD_TOL {
                continue;
            }
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    let n = a.dim();
    let mut m = a.clone();
    let scale: f64 = m.data.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let sgn = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sgn / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    eigs.sort_by(|a, b| b.total_cmp(a));
    eigs
}

/// Pair index of `(i, j)`, `i < j`, in row-major upper-triangular order.
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < m);
    i * (2 * m - i - 1) / 2 + (j - i - 1)
}

/// `Sigma(eta)`: unit diagonal, off-diagonal `beta - eta_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub m: usize,
    pub beta: f64,
    /// Window width; every perturbation lies in `[0, eta]`.
    pub eta: f64,
    /// `m(m-1)/2` perturbations in [`pair_index`] order.
    pub eta_vec: Vec<f64>,
}

impl CovarianceSpec {
    pub fn new(m: usize, beta: f64, eta: f64, eta_vec: Vec<f64>) -> Result<Self> {
        let spec = Self { m, beta, eta, eta_vec };
        spec.validate()?;
        Ok(spec)
    }

    /// All perturbations zero: `(1 - beta) I + beta 11^T`.
    pub fn unperturbed(m: usize, beta: f64) -> Result<Self> {
        Self::new(m, beta, 0.0, vec![0.0; m * (m - 1) / 2])
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return param("covariance dimension must be at least 1");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return param(format!("beta = {} must lie in (0, 1)", self.beta));
        }
        if !(self.eta >= 0.0 && self.eta < self.beta) {
            return param(format!("eta = {} must lie in [0, beta)", self.eta));
        }
        if self.eta_vec.len() != self.m * (self.m - 1) / 2 {
            return param(format!(
                "expected {} perturbations, got {}",
                self.m * (self.m - 1) / 2,
                self.eta_vec.len()
            ));
        }
        if let Some(bad) = self.eta_vec.iter().find(|&&e| !(0.0..=self.eta).contains(&e)) {
            return param(format!("perturbation {bad} outside [0, {}]", self.eta));
        }
        Ok(())
    }

    /// Largest window width for which the determinant bound applies.
    pub fn admissible_eta(m: usize, beta: f64) -> f64 {
        (1.0 - beta) / (2.0 * m as f64)
    }

    pub fn materialize(&self) -> Matrix {
        let mut s = Matrix::identity(self.m);
        for i in 0..self.m {
            for j in i + 1..self.m {
                let v = self.beta - self.eta_vec[pair_index(self.m, i, j)];
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }
}

/// Positive-definiteness, determinant, and spectrum of `Sigma(eta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceAnalysis {
    pub pd: bool,
    pub det: f64,
    /// `((1 - beta) / 2)^m`.
    pub det_lower_bound: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
}

pub fn covariance_analysis(spec: &CovarianceSpec) -> Result<CovarianceAnalysis> {
    spec.validate()?;
    let sigma = spec.materialize();
    let eigenvalues = symmetric_eigenvalues(&sigma);
    let (pd, det) = match cholesky(&sigma, false) {
        Ok(l) => (true, (0..spec.m).map(|i| l[(i, i)] * l[(i, i)]).product()),
        Err(_) => (false, eigenvalues.iter().product()),
    };
    Ok(CovarianceAnalysis {
        pd,
        det,
        det_lower_bound: ((1.0 - spec.beta) / 2.0).powi(spec.m as i32),
        eigenvalues,
    })
}
