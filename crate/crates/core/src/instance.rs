//! Seeded random instances and correlated ensembles.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng;

/// Entry distribution of a random matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Disorder {
    Gaussian,
    Rademacher,
    Bernoulli { p: f64 },
}

impl Disorder {
    pub fn is_integer(&self) -> bool {
        !matches!(self, Disorder::Gaussian)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Disorder::Bernoulli { p } if !(p > 0.0 && p < 1.0) => {
                param(format!("bernoulli p = {p} must lie in (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Disorder::Gaussian => "gaussian",
            Disorder::Rademacher => "rademacher",
            Disorder::Bernoulli { .. } => "bernoulli",
        }
    }

    fn sample(&self, seed: u64, row: usize, col: usize) -> Sample {
        match *self {
            Disorder::Gaussian => Sample::Real(rng::entry_normal(seed, row, col)),
            Disorder::Rademacher => {
                let bit = rng::coin(seed, ((row as u64) << 32) | col as u64, rng::domain::ENTRY);
                Sample::Int(if bit { 1 } else { -1 })
            }
            Disorder::Bernoulli { p } => {
                Sample::Int(i8::from(rng::entry_uniform(seed, row, col) < p))
            }
        }
    }
}

impl std::str::FromStr for Disorder {
    type Err = Error;

    /// Accepts `gaussian`, `rademacher`, or `bernoulli:P`.
    fn from_str(s: &str) -> Result<Self> {
        let d = match s {
            "gaussian" => Disorder::Gaussian,
            "rademacher" => Disorder::Rademacher,
            other => match other.strip_prefix("bernoulli:") {
                Some(p) => Disorder::Bernoulli {
                    p: p.parse().map_err(|_| Error::Parameter(format!("bad p in {s:?}")))?,
                },
                None => return param(format!("unknown disorder {s:?}")),
            },
        };
        d.validate()?;
        Ok(d)
    }
}

enum Sample {
    Real(f64),
    Int(i8),
}

/// Matrix storage. Integer disorders keep their exact values.
#[derive(Clone, Debug, PartialEq)]
pub enum Entries {
    Real(Vec<f64>),
    Integer(Vec<i8>),
}

/// An `rows x cols` random matrix together with the parameters that produced it.
///
/// Entries are row-major. For instances made by [`generate`] the entries are a
/// pure function of `(rows, cols, disorder, seed)`; members of an ensemble
/// carry their member seed and are determined by the ensemble description.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    rows: usize,
    cols: usize,
    disorder: Disorder,
    seed: u64,
    entries: Entries,
}

impl Instance {
    /// Builds an instance from explicit real entries (tagged gaussian).
    pub fn from_real(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols)?;
        if data.len() != rows * cols {
            return param(format!("expected {} entries, got {}", rows * cols, data.len()));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return param("entries must be finite");
        }
        Ok(Self { rows, cols, disorder: Disorder::Gaussian, seed: 0, entries: Entries::Real(data) })
    }

    /// Builds an instance from explicit integer entries.
    pub fn from_integer(
        rows: usize,
        cols: usize,
        disorder: Disorder,
        data: Vec<i8>,
    ) -> Result<Self> {
        check_dims(rows, cols)?;
        if !disorder.is_integer() {
            return param("integer entries need an integer disorder");
        }
        if data.len() != rows * cols {
            return param(format!("expected {} entries, got {}", rows * cols, data.len()));
        }
        let ok = match disorder {
            Disorder::Rademacher => data.iter().all(|&x| x == 1 || x == -1),
            _ => data.iter().all(|&x| x == 0 || x == 1),
        };
        if !ok {
            return param("entries outside the support of the disorder");
        }
        Ok(Self { rows, cols, disorder, seed: 0, entries: Entries::Integer(data) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn disorder(&self) -> Disorder {
        self.disorder
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let i = row * self.cols + col;
        match &self.entries {
            Entries::Real(v) => v[i],
            Entries::Integer(v) => f64::from(v[i]),
        }
    }

    /// Column `col` as a dense vector of length `rows`.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// All columns, column-major, as `f64`.
    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    pub fn frobenius_distance(&self, other: &Instance) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return param("dimension mismatch");
        }
        let mut acc = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let d = self.get(r, c) - other.get(r, c);
                acc += d * d;
            }
        }
        Ok(acc.sqrt())
    }

    /// Writes the single-file instance format: one JSON header line, then the
    /// body as CSV rows or raw little-endian `f64` values.
    pub fn write_to<W: Write>(&self, mut w: W, body: BodyFormat) -> Result<()> {
        let header = InstanceHeader {
            rows: self.rows,
            cols: self.cols,
            disorder: self.disorder.label().to_string(),
            p: match self.disorder {
                Disorder::Bernoulli { p } => Some(p),
                _ => None,
            },
            seed: self.seed,
            body,
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        match body {
            BodyFormat::Csv => {
                for r in 0..self.rows {
                    let line: Vec<String> = (0..self.cols)
                        .map(|c| match &self.entries {
                            Entries::Real(v) => format!("{:?}", v[r * self.cols + c]),
                            Entries::Integer(v) => v[r * self.cols + c].to_string(),
                        })
                        .collect();
                    writeln!(w, "{}", line.join(","))?;
                }
            }
            BodyFormat::F64Le => {
                for r in 0..self.rows {
                    for c in 0..self.cols {
                        w.write_all(&self.get(r, c).to_le_bytes())?;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: InstanceHeader = serde_json::from_str(line.trim_end())?;
        check_dims(header.rows, header.cols)?;
        let disorder = match (header.disorder.as_str(), header.p) {
            ("gaussian", _) => Disorder::Gaussian,
            ("rademacher", _) => Disorder::Rademacher,
            ("bernoulli", Some(p)) => Disorder::Bernoulli { p },
            (d, _) => return Err(Error::Format(format!("unknown disorder {d:?}"))),
        };
        disorder.validate()?;
        let n = header.rows * header.cols;
        let values: Vec<f64> = match header.body {
            BodyFormat::Csv => {
                let mut out = Vec::with_capacity(n);
                for line in r.lines() {
                    let line = line?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    for tok in line.split(',') {
                        out.push(tok.trim().parse::<f64>().map_err(|_| {
                            Error::Format(format!("bad number {tok:?}"))
                        })?);
                    }
                }
                out
            }
            BodyFormat::F64Le => {
                let mut bytes = Vec::new();
                r.read_to_end(&mut bytes)?;
                if bytes.len() != 8 * n {
                    return Err(Error::Format(format!(
                        "expected {} body bytes, got {}",
                        8 * n,
                        bytes.len()
                    )));
                }
                bytes
                    .chunks_exact(8)
                    .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
                    .collect()
            }
        };
        if values.len() != n {
            return Err(Error::Format(format!("expected {n} entries, got {}", values.len())));
        }
        let mut inst = if disorder.is_integer() {
            let ints = values
                .iter()
                .map(|&x| {
                    if x.fract() == 0.0 && x.abs() <= 1.0 {
                        Ok(x as i8)
                    } else {
                        Err(Error::Format(format!("non-integer entry {x}")))
                    }
                })
                .collect::<Result<Vec<i8>>>()?;
            Instance::from_integer(header.rows, header.cols, disorder, ints)?
        } else {
            Instance::from_real(header.rows, header.cols, values)?
        };
        inst.seed = header.seed;
        Ok(inst)
    }
}

/// Body encoding of an instance file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyFormat {
    Csv,
    F64Le,
}

#[derive(Serialize, Deserialize)]
struct InstanceHeader {
    rows: usize,
    cols: usize,
    disorder: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    p: Option<f64>,
    seed: u64,
    body: BodyFormat,
}

fn check_dims(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return param(format!("dimensions must be positive, got {rows}x{cols}"));
    }
    if rows > u32::MAX as usize || cols > u32::MAX as usize {
        return param("dimensions exceed the 32-bit coordinate space");
    }
    Ok(())
}

fn fill_columns(
    rows: usize,
    cols: usize,
    disorder: Disorder,
    seed: u64,
    col_range: std::ops::Range<usize>,
    entries: &mut Entries,
) {
    match entries {
        Entries::Real(v) => v.par_chunks_mut(cols).enumerate().for_each(|(r, row)| {
            for c in col_range.clone() {
                if let Sample::Real(x) = disorder.sample(seed, r, c) {
                    row[c] = x;
                }
            }
        }),
        Entries::Integer(v) => v.par_chunks_mut(cols).enumerate().for_each(|(r, row)| {
            for c in col_range.clone() {
                if let Sample::Int(x) = disorder.sample(seed, r, c) {
                    row[c] = x;
                }
            }
        }),
    }
    debug_assert!(rows * cols == match entries {
        Entries::Real(v) => v.len(),
        Entries::Integer(v) => v.len(),
    });
}

/// Draws a `rows x cols` matrix with i.i.d. entries from `disorder`.
pub fn generate(rows: usize, cols: usize, disorder: Disorder, seed: u64) -> Result<Instance> {
    check_dims(rows, cols)?;
    disorder.validate()?;
    let mut entries = if disorder.is_integer() {
        Entries::Integer(vec![0; rows * cols])
    } else {
        Entries::Real(vec![0.0; rows * cols])
    };
    fill_columns(rows, cols, disorder, seed, 0..cols, &mut entries);
    Ok(Instance { rows, cols, disorder, seed, entries })
}

/// Number of resampled columns for a fraction `delta` of `n` (rounded down).
pub fn suffix_len(n: usize, delta: f64) -> usize {
    (delta * n as f64).floor() as usize
}

/// Returns `m` instances: `base` first, then `m - 1` copies whose last `k`
/// columns are redrawn from `seeds[i]` with the base disorder.
pub fn resample_suffix(base: &Instance, k: usize, m: usize, seeds: &[u64]) -> Result<Vec<Instance>> {
    if k == 0 || k > base.cols {
        return param(format!("resample count k = {k} must lie in 1..={}", base.cols));
    }
    if m < 2 {
        return param("an ensemble needs at least two members");
    }
    if seeds.len() != m - 1 {
        return param(format!("expected {} member seeds, got {}", m - 1, seeds.len()));
    }
    let mut out = Vec::with_capacity(m);
    out.push(base.clone());
    for &s in seeds {
        let mut member = base.clone();
        member.seed = s;
        fill_columns(base.rows, base.cols, base.disorder, s, base.cols - k..base.cols, &mut member.entries);
        out.push(member);
    }
    Ok(out)
}

/// Entrywise `cos(tau) * base + sin(tau) * fresh`.
pub fn interpolate(base: &Instance, fresh: &Instance, tau: f64) -> Result<Instance> {
    if base.disorder != Disorder::Gaussian || fresh.disorder != Disorder::Gaussian {
        return Err(Error::UnsupportedDisorder(
            "interpolation is defined for gaussian instances only".into(),
        ));
    }
    if base.rows != fresh.rows || base.cols != fresh.cols {
        return param("interpolated instances must have equal dimensions");
    }
    check_angle(tau)?;
    let (s, c) = tau.sin_cos();
    let (Entries::Real(a), Entries::Real(b)) = (&base.entries, &fresh.entries) else {
        unreachable!("gaussian instances store real entries")
    };
    let data = a.iter().zip(b).map(|(x, y)| c * x + s * y).collect();
    Ok(Instance {
        rows: base.rows,
        cols: base.cols,
        disorder: Disorder::Gaussian,
        seed: fresh.seed,
        entries: Entries::Real(data),
    })
}

fn check_angle(tau: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&tau) {
        return param(format!("angle {tau} outside [0, pi/2]"));
    }
    Ok(())
}

/// How the members of an ensemble are correlated with the base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum EnsembleMode {
    SuffixResample { k: usize, m: usize },
    Interpolate { angles: Vec<f64> },
}

/// A correlated family of instances built from one base draw.
///
/// `member_seeds[0]` is the base seed. In suffix mode the remaining seeds
/// redraw the suffix columns; in interpolation mode seed `i` draws the fresh
/// matrix mixed in at angle `angles[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub rows: usize,
    pub cols: usize,
    pub disorder: Disorder,
    pub mode: EnsembleMode,
    pub member_seeds: Vec<u64>,
}

impl EnsembleSpec {
    /// Suffix ensemble with member seeds derived from `seed`.
    pub fn suffix(rows: usize, cols: usize, disorder: Disorder, k: usize, m: usize, seed: u64) -> Self {
        let member_seeds = (0..m as u64)
            .map(|i| if i == 0 { seed } else { rng::derive_seed(seed, i) })
            .collect();
        Self { rows, cols, disorder, mode: EnsembleMode::SuffixResample { k, m }, member_seeds }
    }

    /// Interpolated ensemble; `member_seeds` has one entry for the shared base
    /// followed by one per angle.
    pub fn interpolated(rows: usize, cols: usize, angles: Vec<f64>, seed: u64) -> Self {
        let member_seeds = (0..=angles.len() as u64)
            .map(|i| if i == 0 { seed } else { rng::derive_seed(seed, i) })
            .collect();
        Self {
            rows,
            cols,
            disorder: Disorder::Gaussian,
            mode: EnsembleMode::Interpolate { angles },
            member_seeds,
        }
    }

    pub fn members(&self) -> usize {
        match &self.mode {
            EnsembleMode::SuffixResample { m, .. } => *m,
            EnsembleMode::Interpolate { angles } => angles.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_dims(self.rows, self.cols)?;
        self.disorder.validate()?;
        match &self.mode {
            EnsembleMode::SuffixResample { k, m } => {
                if *k == 0 || *k > self.cols {
                    return param(format!("resample count k = {k} must lie in 1..={}", self.cols));
                }
                if *m < 1 {
                    return param("member count must be at least 1");
                }
                if self.member_seeds.len() != *m {
                    return param("one seed per member required");
                }
            }
            EnsembleMode::Interpolate { angles } => {
                if angles.is_empty() {
                    return param("member count must be at least 1");
                }
                if self.disorder != Disorder::Gaussian {
                    return Err(Error::UnsupportedDisorder(
                        "interpolation is defined for gaussian instances only".into(),
                    ));
                }
                for &t in angles {
                    check_angle(t)?;
                }
                if self.member_seeds.len() != angles.len() + 1 {
                    return param("one seed for the base plus one per angle required");
                }
            }
        }
        Ok(())
    }

    /// Materializes every member.
    pub fn build(&self) -> Result<Vec<Instance>> {
        self.validate()?;
        let base = generate(self.rows, self.cols, self.disorder, self.member_seeds[0])?;
        match &self.mode {
            EnsembleMode::SuffixResample { k, m } => {
                if *m == 1 {
                    Ok(vec![base])
                } else {
                    resample_suffix(&base, *k, *m, &self.member_seeds[1..])
                }
            }
            EnsembleMode::Interpolate { angles } => angles
                .iter()
                .zip(&self.member_seeds[1..])
                .map(|(&t, &s)| {
                    let fresh = generate(self.rows, self.cols, Disorder::Gaussian, s)?;
                    interpolate(&base, &fresh, t)
                })
                .collect(),
        }
    }
}
