//! Geometry of solution sets: overlap histograms, exhaustive searches for
//! forbidden tuples, and the stability probe for online algorithms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{disc_value, enumerate_masks_within, sbp_threshold};
use crate::error::{param, Error, Result};
use crate::online::OnlineAlg;
use crate::{generate, interpolate, rng, Disorder, Instance, SignVector};

pub const DEFAULT_XI_MAX_N: usize = 22;
pub const DEFAULT_OGP_MAX_N_PAIR: usize = 18;
pub const DEFAULT_OGP_MAX_N: usize = 14;
/// Slack when converting an overlap window to integer Hamming distances.
const WINDOW_SLACK: f64 = 1e-9;

/// Default OGP capacity for tuples of size `m`.
pub fn default_ogp_max_n(m: usize) -> usize {
    if m <= 2 {
        DEFAULT_OGP_MAX_N_PAIR
    } else {
        DEFAULT_OGP_MAX_N
    }
}

/// Ensemble parameters a certificate was found under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ensemble", rename_all = "snake_case")]
pub enum EnsembleParams {
    /// Members share all but the last `k` columns.
    Suffix { k: usize, delta: f64 },
    /// Member `i` was solved at angle `taus[i]`.
    Interpolated { taus: Vec<f64> },
}

/// An `m`-tuple of sign vectors, each solving its own member instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleCertificate {
    pub members: Vec<SignVector>,
    /// `n^{-1} <sigma_i, sigma_j>` in pair order `(0,1), (0,2), ..., (m-2,m-1)`.
    pub overlaps: Vec<f64>,
    pub disc_values: Vec<f64>,
    pub threshold: f64,
    pub params: EnsembleParams,
}

impl TupleCertificate {
    fn build(members: Vec<SignVector>, instances: &[&Instance], threshold: f64, params: EnsembleParams) -> Result<Self> {
        let mut overlaps = Vec::new();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                overlaps.push(members[i].overlap(&members[j]));
            }
        }
        let disc_values = members
            .iter()
            .zip(instances)
            .map(|(s, inst)| Ok(disc_value(inst, s)?.value))
            .collect::<Result<_>>()?;
        Ok(Self { members, overlaps, disc_values, threshold, params })
    }

    /// Recomputes everything from `instances` (one per member). With a
    /// window, every pairwise overlap must fall inside it.
    pub fn verify(&self, instances: &[Instance], window: Option<&OgpWindow>) -> Result<bool> {
        if instances.len() != self.members.len() {
            return Ok(false);
        }
        let n = self.members.first().map_or(0, SignVector::len);
        let mut idx = 0;
        for i in 0..self.members.len() {
            for j in i + 1..self.members.len() {
                let d = self.members[i].hamming(&self.members[j]);
                let o = crate::overlap_from_hamming(d, n);
                if o != self.overlaps[idx] {
                    return Ok(false);
                }
                if let Some(w) = window {
                    if !w.contains_hamming(d, n) {
                        return Ok(false);
                    }
                }
                idx += 1;
            }
        }
        for ((s, inst), &v) in self.members.iter().zip(instances).zip(&self.disc_values) {
            let fresh = disc_value(inst, s)?.value;
            if fresh != v || fresh > self.threshold {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Pairwise overlap window `[beta - eta, beta]` and solution level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OgpWindow {
    pub beta: f64,
    pub eta: f64,
    /// Solutions satisfy `|M sigma|_inf <= K`, or `<= K sqrt(n)` when `sbp`.
    pub k: f64,
    pub m: usize,
    #[serde(default)]
    pub sbp: bool,
}

impl OgpWindow {
    /// Accepts the closed range `0 <= eta <= beta <= 1`; degenerate windows
    /// such as `[1, 1]` are useful as search sanity checks.
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.eta && self.eta <= self.beta && self.beta <= 1.0) {
            return param(format!("need 0 <= eta <= beta <= 1, got eta = {}, beta = {}", self.eta, self.beta));
        }
        if self.m < 2 {
            return param("tuple size m must be at least 2");
        }
        if !(self.k > 0.0) {
            return param(format!("K = {} must be positive", self.k));
        }
        Ok(())
    }

    /// Whether `0 < eta < beta < 1`, as required of a genuine OGP window.
    pub fn is_proper(&self) -> bool {
        0.0 < self.eta && self.eta < self.beta && self.beta < 1.0
    }

    pub fn threshold(&self, n: usize) -> f64 {
        if self.sbp {
            sbp_threshold(self.k, n)
        } else {
            self.k
        }
    }

    /// Inclusive Hamming range equivalent to the overlap window at length `n`.
    pub fn hamming_range(&self, n: usize) -> (usize, usize) {
        let nf = n as f64;
        let lo = (nf * (1.0 - self.beta) / 2.0 - WINDOW_SLACK).ceil().max(0.0) as usize;
        let hi = (nf * (1.0 - self.beta + self.eta) / 2.0 + WINDOW_SLACK).floor().max(-1.0);
        if hi < 0.0 {
            return (1, 0);
        }
        (lo, (hi as usize).min(n))
    }

    pub fn contains_hamming(&self, d: usize, n: usize) -> bool {
        let (lo, hi) = self.hamming_range(n);
        lo <= d && d <= hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

/// Equal-width histogram of pairwise overlaps over `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bins: Vec<HistogramBin>,
    pub total: u64,
}

/// Histogram of `n^{-1} <sigma_i, sigma_j>` over all unordered pairs. The
/// last bin is closed on the right.
pub fn overlap_histogram(solutions: &[SignVector], bins: usize) -> Result<Histogram> {
    if solutions.len() < 2 {
        return param("need at least two solutions");
    }
    if bins == 0 {
        return param("bin count must be positive");
    }
    let n = solutions[0].len();
    if n == 0 || solutions.iter().any(|s| s.len() != n) {
        return param("solutions must share a positive length");
    }
    let counts = (0..solutions.len())
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut acc, i| {
                for j in i + 1..solutions.len() {
                    let d = solutions[i].hamming(&solutions[j]);
                    // (o + 1) / 2 = (n - d) / n, in exact integer arithmetic
                    let b = ((n - d) * bins / n).min(bins - 1);
                    acc[b] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let width = 2.0 / bins as f64;
    Ok(Histogram {
        total: counts.iter().sum(),
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(b, count)| HistogramBin { lo: -1.0 + b as f64 * width, hi: -1.0 + (b + 1) as f64 * width, count })
            .collect(),
    })
}

/// Per-prefix solution counts of one member, with the smallest solution mask
/// for each prefix.
struct PrefixTable {
    counts: Vec<u64>,
    first: Vec<u64>,
}

fn prefix_table(inst: &Instance, shared: usize, threshold: f64, max_n: usize) -> Result<PrefixTable> {
    let size = 1usize << shared;
    let prefix_mask = (size - 1) as u64;
    let mut counts = vec![0u64; size];
    let mut first = vec![u64::MAX; size];
    for mask in enumerate_masks_within(inst, threshold, max_n)? {
        let p = (mask & prefix_mask) as usize;
        counts[p] += 1;
        first[p] = first[p].min(mask);
    }
    Ok(PrefixTable { counts, first })
}

fn check_suffix_members(members: &[Instance], k: usize) -> Result<usize> {
    let Some(base) = members.first() else {
        return param("ensemble is empty");
    };
    let n = base.cols();
    if k > n {
        return param(format!("suffix length {k} exceeds n = {n}"));
    }
    let shared = n - k;
    for inst in &members[1..] {
        if inst.rows() != base.rows() || inst.cols() != n || inst.disorder() != base.disorder() {
            return param("ensemble members must share dimensions and disorder");
        }
        for c in 0..shared {
            if (0..base.rows()).any(|r| inst.get(r, c) != base.get(r, c)) {
                return param(format!("members differ in shared column {c}"));
            }
        }
    }
    Ok(shared)
}

/// Outcome of a shared-prefix tuple search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiSearch {
    pub certificate: Option<TupleCertificate>,
    /// Number of tuples `(sigma_1, ..., sigma_m)` agreeing on the shared
    /// coordinates with every member within the threshold.
    pub count: u128,
}

/// Exhaustive search over tuples that agree on the first `n - k`
/// coordinates, member `i` satisfying `|M_i sigma_i|_inf <= threshold`.
///
/// The certificate is the first tuple in order of (shared prefix, member
/// masks), reading coordinate `j` as bit `j` with `-1` set.
pub fn search_shared_prefix(members: &[Instance], k: usize, threshold: f64, max_n: usize) -> Result<XiSearch> {
    let shared = check_suffix_members(members, k)?;
    let n = members[0].cols();
    let tables = members
        .iter()
        .map(|inst| prefix_table(inst, shared, threshold, max_n))
        .collect::<Result<Vec<_>>>()?;
    let mut count = 0u128;
    let mut best: Option<usize> = None;
    for p in 0..1usize << shared {
        let prod = tables.iter().map(|t| u128::from(t.counts[p])).product::<u128>();
        if prod > 0 && best.is_none() {
            best = Some(p);
        }
        count += prod;
    }
    let certificate = match best {
        None => None,
        Some(p) => {
            let signs = tables.iter().map(|t| SignVector::from_mask(t.first[p], n)).collect();
            let refs: Vec<&Instance> = members.iter().collect();
            Some(TupleCertificate::build(
                signs,
                &refs,
                threshold,
                EnsembleParams::Suffix { k, delta: k as f64 / n as f64 },
            )?)
        }
    };
    Ok(XiSearch { certificate, count })
}

/// Tuples of perceptron solutions (`|M_i sigma_i|_inf <= kappa sqrt(n)`) on a
/// suffix-resampled gaussian ensemble, agreeing outside the last `k`
/// coordinates.
pub fn search_xi_sbp(members: &[Instance], k: usize, kappa: f64, max_n: usize) -> Result<XiSearch> {
    if !(kappa > 0.0) {
        return param(format!("kappa = {kappa} must be positive"));
    }
    if members.iter().any(|m| m.disorder() != Disorder::Gaussian) {
        return Err(Error::UnsupportedDisorder("perceptron ensembles are gaussian".into()));
    }
    let n = members.first().map_or(0, Instance::cols);
    search_shared_prefix(members, k, sbp_threshold(kappa, n), max_n)
}

/// Tuples of low-discrepancy colorings (`|M_i sigma_i|_inf <= c_u sqrt(M)`)
/// on a suffix-resampled integer ensemble.
pub fn search_xi_disc(members: &[Instance], k: usize, c_u: f64, max_n: usize) -> Result<XiSearch> {
    if !(c_u > 0.0) {
        return param(format!("c_u = {c_u} must be positive"));
    }
    if members.iter().any(|m| !m.disorder().is_integer()) {
        return Err(Error::UnsupportedDisorder("discrepancy ensembles need integer entries".into()));
    }
    let rows = members.first().map_or(0, Instance::rows);
    search_shared_prefix(members, k, c_u * (rows as f64).sqrt(), max_n)
}

/// A base instance, one independent matrix per tuple member, and a finite
/// angle grid: member `i` at angle `tau` is `cos(tau) base + sin(tau) fresh_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolatedFamily {
    pub base: Instance,
    pub fresh: Vec<Instance>,
    pub angles: Vec<f64>,
}

impl InterpolatedFamily {
    /// Base drawn from `seed`, member `i` from `derive_seed(seed, i + 1)`.
    pub fn generate(rows: usize, cols: usize, m: usize, angles: Vec<f64>, seed: u64) -> Result<Self> {
        let base = generate(rows, cols, Disorder::Gaussian, seed)?;
        let fresh = (1..=m as u64)
            .map(|i| generate(rows, cols, Disorder::Gaussian, rng::derive_seed(seed, i)))
            .collect::<Result<_>>()?;
        Ok(Self { base, fresh, angles })
    }

    pub fn members(&self) -> usize {
        self.fresh.len()
    }

    pub fn member(&self, i: usize, tau: f64) -> Result<Instance> {
        interpolate(&self.base, &self.fresh[i], tau)
    }
}

/// `{j pi / (2q) : 0 <= j <= q}`.
pub fn angle_grid(q: usize) -> Result<Vec<f64>> {
    if q == 0 {
        return param("grid resolution must be positive");
    }
    Ok((0..=q).map(|j| j as f64 * std::f64::consts::FRAC_PI_2 / q as f64).collect())
}

/// Angle grid at the resolution `Q` of the stability constants.
pub fn stable_angle_grid(eta: f64, lipschitz: f64, m: usize) -> Result<Vec<f64>> {
    let q = crate::theory::stable_constants(eta, lipschitz, m)?.q;
    angle_grid(q.ceil() as usize)
}

/// Candidates for one member: every sign vector solving some grid instance,
/// sorted by mask, each tagged with the first angle index that admits it.
fn member_candidates(family: &InterpolatedFamily, i: usize, threshold: f64, max_n: usize) -> Result<Vec<(u64, usize)>> {
    let mut all: Vec<(u64, usize)> = Vec::new();
    for (a, &tau) in family.angles.iter().enumerate() {
        let inst = family.member(i, tau)?;
        all.extend(enumerate_masks_within(&inst, threshold, max_n)?.into_iter().map(|m| (m, a)));
    }
    all.sort_unstable();
    all.dedup_by_key(|e| e.0);
    Ok(all)
}

fn extend_tuple(cands: &[Vec<(u64, usize)>], chosen: &mut Vec<(u64, usize)>, lo: u32, hi: u32) -> bool {
    let depth = chosen.len();
    if depth == cands.len() {
        return true;
    }
    for &c in &cands[depth] {
        if chosen.iter().all(|p| {
            let d = (p.0 ^ c.0).count_ones();
            lo <= d && d <= hi
        }) {
            chosen.push(c);
            if extend_tuple(cands, chosen, lo, hi) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Searches the interpolated family for `m` sign vectors, member `i` solving
/// `M_i(tau_i)` for some grid angle `tau_i`, with every pairwise overlap in
/// the window. Returns the lexicographically first tuple in per-member mask
/// order.
pub fn search_ogp_tuples(family: &InterpolatedFamily, window: &OgpWindow, max_n: usize) -> Result<Option<TupleCertificate>> {
    window.validate()?;
    if family.angles.is_empty() {
        return param("angle grid is empty");
    }
    if family.members() != window.m {
        return param(format!("family has {} members, window expects {}", family.members(), window.m));
    }
    let n = family.base.cols();
    if n > max_n {
        return Err(Error::Capacity { n, max_n });
    }
    let threshold = window.threshold(n);
    let cands = (0..window.m)
        .map(|i| member_candidates(family, i, threshold, max_n))
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = window.hamming_range(n);
    if lo > hi {
        return Ok(None);
    }
    let (lo, hi) = (lo as u32, hi as u32);
    let found = cands[0].par_iter().find_map_first(|&c| {
        let mut chosen = vec![c];
        extend_tuple(&cands, &mut chosen, lo, hi).then_some(chosen)
    });
    let Some(tuple) = found else {
        return Ok(None);
    };
    let taus: Vec<f64> = tuple.iter().map(|&(_, a)| family.angles[a]).collect();
    let instances = taus
        .iter()
        .enumerate()
        .map(|(i, &t)| family.member(i, t))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Instance> = instances.iter().collect();
    let signs = tuple.iter().map(|&(m, _)| SignVector::from_mask(m, n)).collect();
    Ok(Some(TupleCertificate::build(signs, &refs, threshold, EnsembleParams::Interpolated { taus })?))
}

/// Parameters of a stability probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub rows: usize,
    pub cols: usize,
    /// Correlation `cos(tau)` between the paired instances.
    pub rho: f64,
    pub trials: usize,
    /// Success level for `|M sigma|_inf`.
    pub threshold: Option<f64>,
    pub seed: u64,
    /// Run both instances of a pair with the same auxiliary randomness.
    pub shared_omega: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub algorithm: String,
    pub rho: f64,
    pub trials: usize,
    pub mean_hamming: f64,
    pub std_error: f64,
    /// `(q, d_H quantile)` pairs, nondecreasing in both coordinates.
    pub quantiles: Vec<(f64, f64)>,
    /// Fraction of all `2 * trials` runs at or below the threshold.
    pub success_rate: Option<f64>,
    pub mean_frobenius: f64,
    /// Least-squares slope of `d_H` on `|M - M'|_F`, clamped at zero.
    pub lipschitz: f64,
    /// Smallest `f` with `d_H <= f + L |M - M'|_F` on every trial.
    pub offset: f64,
}

pub const STABILITY_QUANTILES: [f64; 7] = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0];

/// Runs `alg` on `trials` pairs `(M, cos(tau) M + sin(tau) M')` and reports
/// the distribution of output Hamming distances.
pub fn stability_probe(alg: OnlineAlg, cfg: &StabilityConfig) -> Result<StabilityReport> {
    alg.validate()?;
    if !(0.0..=1.0).contains(&cfg.rho) {
        return param(format!("rho = {} outside [0, 1]", cfg.rho));
    }
    if cfg.trials == 0 {
        return param("trials must be positive");
    }
    let tau = cfg.rho.acos();
    let runs: Vec<(usize, f64, u32)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = rng::derive_seed(cfg.seed, t);
            let base = generate(cfg.rows, cfg.cols, Disorder::Gaussian, rng::derive_seed(s, 0))?;
            let fresh = generate(cfg.rows, cfg.cols, Disorder::Gaussian, rng::derive_seed(s, 1))?;
            let other = interpolate(&base, &fresh, tau)?;
            let omega = rng::derive_seed(s, 2);
            let omega_bar = if cfg.shared_omega { omega } else { rng::derive_seed(s, 3) };
            let a = alg.solve(&base, omega)?;
            let b = alg.solve(&other, omega_bar)?;
            let ok = cfg
                .threshold
                .map_or(0, |k| u32::from(a.discrepancy <= k) + u32::from(b.discrepancy <= k));
            Ok((a.signs.hamming(&b.signs), base.frobenius_distance(&other)?, ok))
        })
        .collect::<Result<_>>()?;
    let n = runs.len() as f64;
    let d: Vec<f64> = runs.iter().map(|r| r.0 as f64).collect();
    let f: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = if runs.len() > 1 { d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let mut sorted = d.clone();
    sorted.sort_by(f64::total_cmp);
    let quantiles = STABILITY_QUANTILES
        .iter()
        .map(|&q| (q, sorted[((sorted.len() - 1) as f64 * q).round() as usize]))
        .collect();
    let mean_f = f.iter().sum::<f64>() / n;
    let sxx: f64 = f.iter().map(|x| (x - mean_f).powi(2)).sum();
    let sxy: f64 = f.iter().zip(&d).map(|(x, y)| (x - mean_f) * (y - mean)).sum();
    let lipschitz = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let offset = f.iter().zip(&d).map(|(x, y)| y - lipschitz * x).fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        algorithm: alg.to_string(),
        rho: cfg.rho,
        trials: cfg.trials,
        mean_hamming: mean,
        std_error: (var / n).sqrt(),
        quantiles,
        success_rate: cfg.threshold.map(|_| runs.iter().map(|r| f64::from(r.2)).sum::<f64>() / (2.0 * n)),
        mean_frobenius: mean_f,
        lipschitz,
        offset,
    })
}
