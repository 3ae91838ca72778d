//! Declarative sweeps over seeds, with a manifest of every emitted file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ogp_core::landscape::{search_xi_disc, search_xi_sbp, stability_probe, StabilityConfig, DEFAULT_XI_MAX_N};
use ogp_core::theory::{mc_box_probability, CovarianceSpec, MC_MIN_SAMPLES};
use ogp_core::{
    count_within, exact_discrepancy, generate, rng, sbp_threshold, Disorder, EnsembleSpec, OnlineAlg,
    DEFAULT_ENUMERATE_MAX_N, DEFAULT_EXACT_MAX_N,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::to_json;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DEFAULT_TRIALS: u64 = 200;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] ogp_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ExperimentError::Invalid(msg.into()))
}

/// Half-open seed range `start..end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn single(seed: u64) -> Self {
        Self { start: seed, end: seed.saturating_add(1) }
    }

    pub fn len(&self) -> u64 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> std::ops::Range<u64> {
        self.start..self.end.max(self.start)
    }
}

impl FromStr for SeedRange {
    type Err = String;

    /// Accepts `A..B` or a single seed `A`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad seed {t:?}: {e}"));
        match s.split_once("..") {
            Some((a, b)) => {
                let r = Self { start: parse(a)?, end: parse(b)? };
                if r.end < r.start {
                    return Err(format!("seed range {s:?} ends before it starts"));
                }
                Ok(r)
            }
            None => Ok(Self::single(parse(s)?)),
        }
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

fn gaussian() -> Disorder {
    Disorder::Gaussian
}

fn shared() -> bool {
    true
}

/// What each seed of a sweep computes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TaskKind {
    /// One online run on a fresh instance.
    Online {
        rows: usize,
        cols: usize,
        #[serde(default = "gaussian")]
        disorder: Disorder,
        algorithm: OnlineAlg,
    },
    /// Exact discrepancy by exhaustive search.
    Disc {
        rows: usize,
        cols: usize,
        #[serde(default = "gaussian")]
        disorder: Disorder,
        #[serde(default)]
        max_n: Option<usize>,
    },
    /// Number of perceptron solutions.
    SbpCount {
        rows: usize,
        cols: usize,
        kappa: f64,
        #[serde(default)]
        max_n: Option<usize>,
    },
    /// Shared-prefix tuple search for perceptron solutions.
    XiSbp {
        rows: usize,
        cols: usize,
        k: usize,
        m: usize,
        kappa: f64,
        #[serde(default)]
        max_n: Option<usize>,
    },
    /// Shared-prefix tuple search for low-discrepancy colorings.
    XiDisc {
        rows: usize,
        cols: usize,
        #[serde(default = "rademacher")]
        disorder: Disorder,
        k: usize,
        m: usize,
        c_u: f64,
        #[serde(default)]
        max_n: Option<usize>,
    },
    /// Hamming distance between outputs on correlated pairs; `samples` is the
    /// trial count.
    Stability {
        rows: usize,
        cols: usize,
        rho: f64,
        algorithm: OnlineAlg,
        #[serde(default)]
        threshold: Option<f64>,
        #[serde(default = "shared")]
        shared_omega: bool,
    },
    /// Monte Carlo box probability under the unperturbed overlap covariance.
    BoxProbability { m: usize, beta: f64, half_width: f64 },
}

fn rademacher() -> Disorder {
    Disorder::Rademacher
}

impl TaskKind {
    pub fn label(&self) -> &'static str {
        match self {
            TaskKind::Online { .. } => "online",
            TaskKind::Disc { .. } => "disc",
            TaskKind::SbpCount { .. } => "sbp-count",
            TaskKind::XiSbp { .. } => "xi-sbp",
            TaskKind::XiDisc { .. } => "xi-disc",
            TaskKind::Stability { .. } => "stability",
            TaskKind::BoxProbability { .. } => "box-probability",
        }
    }

    fn validate(&self, samples: Option<u64>) -> Result<()> {
        let dims = |rows: usize, cols: usize| {
            if rows == 0 || cols == 0 {
                return invalid(format!("dimensions must be positive, got {rows}x{cols}"));
            }
            Ok(())
        };
        let capacity = |cols: usize, max_n: Option<usize>, default: usize| {
            let max_n = max_n.unwrap_or(default);
            if max_n > 63 {
                return invalid(format!("max_n = {max_n} exceeds 63"));
            }
            if cols > max_n {
                return invalid(format!("n = {cols} exceeds the enumeration capacity {max_n}"));
            }
            Ok(())
        };
        let positive = |name: &str, x: f64| {
            if !(x > 0.0 && x.is_finite()) {
                return invalid(format!("{name} = {x} must be positive and finite"));
            }
            Ok(())
        };
        let suffix = |cols: usize, k: usize, m: usize| {
            if k == 0 || k > cols {
                return invalid(format!("k = {k} must lie in 1..={cols}"));
            }
            if m == 0 {
                return invalid("member count m must be positive");
            }
            Ok(())
        };
        match *self {
            TaskKind::Online { rows, cols, disorder, algorithm } => {
                dims(rows, cols)?;
                disorder.validate()?;
                algorithm.validate()?;
            }
            TaskKind::Disc { rows, cols, disorder, max_n } => {
                dims(rows, cols)?;
                disorder.validate()?;
                capacity(cols, max_n, DEFAULT_EXACT_MAX_N)?;
            }
            TaskKind::SbpCount { rows, cols, kappa, max_n } => {
                dims(rows, cols)?;
                positive("kappa", kappa)?;
                capacity(cols, max_n, DEFAULT_ENUMERATE_MAX_N)?;
            }
            TaskKind::XiSbp { rows, cols, k, m, kappa, max_n } => {
                dims(rows, cols)?;
                suffix(cols, k, m)?;
                positive("kappa", kappa)?;
                capacity(cols, max_n, DEFAULT_XI_MAX_N)?;
            }
            TaskKind::XiDisc { rows, cols, disorder, k, m, c_u, max_n } => {
                dims(rows, cols)?;
                disorder.validate()?;
                if !disorder.is_integer() {
                    return invalid("xi-disc needs integer disorder");
                }
                suffix(cols, k, m)?;
                positive("c_u", c_u)?;
                capacity(cols, max_n, DEFAULT_XI_MAX_N)?;
            }
            TaskKind::Stability { rows, cols, rho, algorithm, threshold, .. } => {
                dims(rows, cols)?;
                algorithm.validate()?;
                if !(0.0..=1.0).contains(&rho) {
                    return invalid(format!("rho = {rho} outside [0, 1]"));
                }
                if let Some(t) = threshold {
                    positive("threshold", t)?;
                }
                if samples == Some(0) {
                    return invalid("stability needs at least one trial");
                }
            }
            TaskKind::BoxProbability { m, beta, half_width } => {
                CovarianceSpec::unperturbed(m, beta)?;
                positive("half_width", half_width)?;
                if let Some(s) = samples {
                    if s < MC_MIN_SAMPLES {
                        return invalid(format!("samples = {s} below the minimum {MC_MIN_SAMPLES}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Computes the result for one seed as a JSON value.
    fn run(&self, seed: u64, samples: Option<u64>) -> Result<serde_json::Value> {
        let v = match *self {
            TaskKind::Online { rows, cols, disorder, algorithm } => {
                let inst = generate(rows, cols, disorder, seed)?;
                serde_json::to_value(algorithm.solve(&inst, online_omega(seed))?)?
            }
            TaskKind::Disc { rows, cols, disorder, max_n } => {
                let inst = generate(rows, cols, disorder, seed)?;
                serde_json::to_value(exact_discrepancy(&inst, max_n.unwrap_or(DEFAULT_EXACT_MAX_N))?)?
            }
            TaskKind::SbpCount { rows, cols, kappa, max_n } => {
                let inst = generate(rows, cols, Disorder::Gaussian, seed)?;
                let threshold = sbp_threshold(kappa, cols);
                let count = count_within(&inst, threshold, max_n.unwrap_or(DEFAULT_ENUMERATE_MAX_N))?;
                serde_json::json!({ "kappa": kappa, "threshold": threshold, "count": count })
            }
            TaskKind::XiSbp { rows, cols, k, m, kappa, max_n } => {
                let members = EnsembleSpec::suffix(rows, cols, Disorder::Gaussian, k, m, seed).build()?;
                serde_json::to_value(search_xi_sbp(&members, k, kappa, max_n.unwrap_or(DEFAULT_XI_MAX_N))?)?
            }
            TaskKind::XiDisc { rows, cols, disorder, k, m, c_u, max_n } => {
                let members = EnsembleSpec::suffix(rows, cols, disorder, k, m, seed).build()?;
                serde_json::to_value(search_xi_disc(&members, k, c_u, max_n.unwrap_or(DEFAULT_XI_MAX_N))?)?
            }
            TaskKind::Stability { rows, cols, rho, algorithm, threshold, shared_omega } => {
                let cfg = StabilityConfig {
                    rows,
                    cols,
                    rho,
                    trials: samples.unwrap_or(DEFAULT_TRIALS) as usize,
                    threshold,
                    seed,
                    shared_omega,
                };
                serde_json::to_value(stability_probe(algorithm, &cfg)?)?
            }
            TaskKind::BoxProbability { m, beta, half_width } => {
                let cov = CovarianceSpec::unperturbed(m, beta)?.materialize();
                let est = mc_box_probability(&cov, half_width, samples.unwrap_or(MC_MIN_SAMPLES), seed)?;
                serde_json::to_value(est)?
            }
        };
        Ok(v)
    }
}

/// Auxiliary randomness of an online run on the instance drawn from `seed`.
pub fn online_omega(seed: u64) -> u64 {
    rng::derive_seed(seed, u64::MAX)
}

/// A sweep: one task per seed in `seeds`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub task: TaskKind,
    pub seeds: SeedRange,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub samples: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| ExperimentError::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.end < self.seeds.start {
            return invalid(format!("seed range {} ends before it starts", self.seeds));
        }
        if self.out_dir.is_none() {
            return invalid("no output directory");
        }
        self.task.validate(self.samples)
    }

    fn file_name(&self, seed: u64) -> String {
        format!("{}-seed{seed}.json", self.task.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub seed: u64,
    /// Relative to the output directory.
    pub file: String,
    pub status: TaskStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub tasks: Vec<TaskRecord>,
}

impl Manifest {
    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn failures(&self) -> usize {
        self.tasks.iter().filter(|t| t.status == TaskStatus::Failed).count()
    }
}

#[derive(Serialize)]
struct TaskOutput<'a> {
    kind: &'a str,
    seed: u64,
    result: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Runs every seed in parallel, writes one result file per seed and then
/// `manifest.json`. Nothing is written if the config is invalid; a seed that
/// fails is recorded with its error and the rest still run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    let dir = config.out_dir.as_deref().expect("validated");
    std::fs::create_dir_all(dir)?;
    let label = config.task.label();
    let tasks = config
        .seeds
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|seed| {
            let file = config.file_name(seed);
            let written = config
                .task
                .run(seed, config.samples)
                .and_then(|result| Ok(to_json(&TaskOutput { kind: label, seed, result })?))
                .and_then(|text| {
                    std::fs::write(dir.join(&file), &text)?;
                    Ok(sha256_hex(text.as_bytes()))
                });
            match written {
                Ok(hash) => TaskRecord { seed, file, status: TaskStatus::Ok, sha256: Some(hash), error: None },
                Err(e) => TaskRecord { seed, file, status: TaskStatus::Failed, sha256: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let manifest = Manifest { config: config.clone(), tasks };
    std::fs::write(dir.join(MANIFEST_FILE), to_json(&manifest)?)?;
    Ok(manifest)
}

/// A task whose re-run hash differs from the recorded one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub seed: u64,
    pub file: String,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

/// Re-runs the configuration recorded in a manifest into `out_dir` and
/// returns the tasks whose output hashes changed.
pub fn rerun_manifest(manifest: &Manifest, out_dir: &Path) -> Result<(Manifest, Vec<Mismatch>)> {
    let mut config = manifest.config.clone();
    config.out_dir = Some(out_dir.to_path_buf());
    let fresh = run_experiment(&config)?;
    let mismatches = manifest
        .tasks
        .iter()
        .zip(&fresh.tasks)
        .filter(|(a, b)| a.sha256 != b.sha256 || a.file != b.file)
        .map(|(a, b)| Mismatch { seed: a.seed, file: a.file.clone(), expected: a.sha256.clone(), actual: b.sha256.clone() })
        .collect();
    Ok((fresh, mismatches))
}
