//! Online signing: the column-at-a-time harness and the shipped algorithms.
//!
//! An online algorithm picks sign `t` after seeing columns `0..=t` only. The
//! harness enforces this by construction: [`run_online`] hands the algorithm
//! one column at a time together with the running state, and never exposes
//! the rest of the instance.

use serde::{Deserialize, Serialize};

use crate::discrepancy::{disc_value, DiscrepancyResult};
use crate::error::{param, Error, Result};
use crate::instance::{EnsembleSpec, Instance};
use crate::{rng, Disorder, SignVector};

/// Signs chosen so far, summarized by the signed prefix sum of columns.
#[derive(Clone, Debug, PartialEq)]
pub struct OnlineState {
    t: usize,
    partial_sums: Vec<f64>,
}

impl OnlineState {
    pub fn new(rows: usize) -> Self {
        Self { t: 0, partial_sums: vec![0.0; rows] }
    }

    /// Index of the column about to be signed.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn partial_sums(&self) -> &[f64] {
        &self.partial_sums
    }

    fn advance(&mut self, sign: i8, column: &[f64]) {
        let s = f64::from(sign);
        for (p, c) in self.partial_sums.iter_mut().zip(column) {
            *p += s * c;
        }
        self.t += 1;
    }
}

pub trait OnlineAlgorithm: Send + Sync {
    fn name(&self) -> &str;

    /// Sign for column `state.t()`. Anything other than +-1 is rejected by
    /// the harness.
    fn step(&self, state: &OnlineState, column: &[f64]) -> i8;
}

/// Output of one online run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnlineRun {
    pub algorithm: String,
    pub signs: SignVector,
    pub discrepancy: f64,
    pub row_sums: Vec<f64>,
}

/// Feeds `inst` to `alg` column by column.
pub fn run_online(alg: &dyn OnlineAlgorithm, inst: &Instance) -> Result<OnlineRun> {
    let mut state = OnlineState::new(inst.rows());
    let mut signs = Vec::with_capacity(inst.cols());
    for t in 0..inst.cols() {
        let column = inst.column(t);
        let s = alg.step(&state, &column);
        if s != 1 && s != -1 {
            return Err(Error::ContractViolation { t, value: s });
        }
        state.advance(s, &column);
        signs.push(s);
    }
    let signs = SignVector::new(signs)?;
    let DiscrepancyResult { value, row_sums, .. } = disc_value(inst, &signs)?;
    Ok(OnlineRun { algorithm: alg.name().to_string(), signs, discrepancy: value, row_sums })
}

fn sup_after(partial: &[f64], column: &[f64], s: f64) -> f64 {
    partial.iter().zip(column).fold(0.0f64, |m, (p, c)| m.max((p + s * c).abs()))
}

/// Sign minimizing `|partial + s * column|_inf`; +1 on ties.
pub fn greedy_online_step(state: &OnlineState, column: &[f64]) -> i8 {
    let plus = sup_after(&state.partial_sums, column, 1.0);
    let minus = sup_after(&state.partial_sums, column, -1.0);
    if minus < plus {
        -1
    } else {
        1
    }
}

/// `ln cosh(x)` without overflow.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln sum_i cosh(lambda * w_i)` by log-sum-exp.
fn log_potential(w: impl Iterator<Item = f64>, lambda: f64) -> f64 {
    let terms: Vec<f64> = w.map(|x| ln_cosh(lambda * x)).collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// Sign minimizing `sum_i cosh(lambda * (partial_i + s * column_i))`; +1 on ties.
pub fn potential_online_step(state: &OnlineState, column: &[f64], lambda: f64) -> Result<i8> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return param(format!("lambda = {lambda} must be positive"));
    }
    Ok(potential_choice(&state.partial_sums, column, lambda))
}

fn potential_choice(partial: &[f64], column: &[f64], lambda: f64) -> i8 {
    let plus = log_potential(partial.iter().zip(column).map(|(p, c)| p + c), lambda);
    let minus = log_potential(partial.iter().zip(column).map(|(p, c)| p - c), lambda);
    if minus < plus {
        -1
    } else {
        1
    }
}

/// I.i.d. uniform signs keyed by `(seed, t)`.
pub fn random_signing(inst: &Instance, seed: u64) -> SignVector {
    let signs = (0..inst.cols())
        .map(|t| if rng::coin(seed, t as u64, rng::domain::SIGNING) { 1 } else { -1 })
        .collect();
    SignVector::new(signs).expect("coins are +-1")
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy;

impl OnlineAlgorithm for Greedy {
    fn name(&self) -> &str {
        "greedy"
    }

    fn step(&self, state: &OnlineState, column: &[f64]) -> i8 {
        greedy_online_step(state, column)
    }
}

/// Hyperbolic-cosine potential minimizer.
#[derive(Clone, Copy, Debug)]
pub struct Potential {
    lambda: f64,
}

impl Potential {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return param(format!("lambda = {lambda} must be positive"));
        }
        Ok(Self { lambda })
    }

    /// `lambda = 1 / sqrt(rows)`.
    pub fn with_default_lambda(rows: usize) -> Self {
        Self { lambda: 1.0 / (rows.max(1) as f64).sqrt() }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl OnlineAlgorithm for Potential {
    fn name(&self) -> &str {
        "potential"
    }

    fn step(&self, state: &OnlineState, column: &[f64]) -> i8 {
        potential_choice(&state.partial_sums, column, self.lambda)
    }
}

/// Signs that ignore the input entirely.
#[derive(Clone, Copy, Debug)]
pub struct RandomSigning {
    pub seed: u64,
}

impl OnlineAlgorithm for RandomSigning {
    fn name(&self) -> &str {
        "random"
    }

    fn step(&self, state: &OnlineState, _column: &[f64]) -> i8 {
        if rng::coin(self.seed, state.t as u64, rng::domain::SIGNING) {
            1
        } else {
            -1
        }
    }
}

/// Always answers with a fixed value; used to exercise the harness.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub i8);

impl OnlineAlgorithm for Constant {
    fn name(&self) -> &str {
        "constant"
    }

    fn step(&self, _state: &OnlineState, _column: &[f64]) -> i8 {
        self.0
    }
}

/// Serializable algorithm choice. `omega` is the auxiliary randomness; only
/// random signing consumes it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "alg", rename_all = "lowercase")]
pub enum OnlineAlg {
    Greedy,
    Potential {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
    Random,
}

impl OnlineAlg {
    pub const ALL: [OnlineAlg; 3] =
        [OnlineAlg::Greedy, OnlineAlg::Potential { lambda: None }, OnlineAlg::Random];

    pub fn validate(&self) -> Result<()> {
        if let OnlineAlg::Potential { lambda: Some(l) } = *self {
            Potential::new(l)?;
        }
        Ok(())
    }

    pub fn instantiate(&self, rows: usize, omega: u64) -> Result<Box<dyn OnlineAlgorithm>> {
        Ok(match *self {
            OnlineAlg::Greedy => Box::new(Greedy),
            OnlineAlg::Potential { lambda: Some(l) } => Box::new(Potential::new(l)?),
            OnlineAlg::Potential { lambda: None } => Box::new(Potential::with_default_lambda(rows)),
            OnlineAlg::Random => Box::new(RandomSigning { seed: omega }),
        })
    }

    /// Runs the algorithm on `inst` with auxiliary seed `omega`.
    pub fn solve(&self, inst: &Instance, omega: u64) -> Result<OnlineRun> {
        run_online(self.instantiate(inst.rows(), omega)?.as_ref(), inst)
    }
}

impl std::fmt::Display for OnlineAlg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OnlineAlg::Greedy => f.write_str("greedy"),
            OnlineAlg::Potential { .. } => f.write_str("potential"),
            OnlineAlg::Random => f.write_str("random"),
        }
    }
}

impl std::str::FromStr for OnlineAlg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(OnlineAlg::Greedy),
            "potential" => Ok(OnlineAlg::Potential { lambda: None }),
            "random" => Ok(OnlineAlg::Random),
            other => param(format!("unknown online algorithm {other:?}")),
        }
    }
}

/// Joint versus single-run success over suffix-resampled ensembles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationReport {
    pub ensembles: usize,
    pub members: usize,
    pub threshold: f64,
    /// Success frequency of the first member alone.
    pub single: f64,
    /// Frequency with which every member succeeds.
    pub joint: f64,
    /// `single^members`.
    pub single_pow: f64,
    /// Delta-method standard error of `joint - single_pow`.
    pub std_error: f64,
}

impl AmplificationReport {
    /// Whether `joint >= single^m - z * SE`.
    pub fn holds(&self, z: f64) -> bool {
        self.joint >= self.single_pow - z * self.std_error
    }
}

/// Parameters of an amplification experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplificationConfig {
    pub rows: usize,
    pub cols: usize,
    pub disorder: Disorder,
    /// Resampled suffix length.
    pub k: usize,
    pub members: usize,
    /// Success means `|M sigma|_inf <= threshold`.
    pub threshold: f64,
    pub ensembles: usize,
    pub seed: u64,
}

/// Runs `alg` on every member of `ensembles` independent suffix ensembles and
/// compares the joint success frequency with the `m`-th power of the
/// single-run frequency.
pub fn amplification(alg: OnlineAlg, cfg: &AmplificationConfig) -> Result<AmplificationReport> {
    use rayon::prelude::*;
    if cfg.members < 2 || cfg.ensembles == 0 {
        return param("need at least two members and one ensemble");
    }
    alg.validate()?;
    let outcomes: Vec<(bool, bool)> = (0..cfg.ensembles as u64)
        .into_par_iter()
        .map(|e| {
            let spec = EnsembleSpec::suffix(
                cfg.rows,
                cfg.cols,
                cfg.disorder,
                cfg.k,
                cfg.members,
                rng::derive_seed(cfg.seed, e),
            );
            let members = spec.build()?;
            let ok: Vec<bool> = members
                .iter()
                .map(|inst| Ok(alg.solve(inst, spec.member_seeds[0])?.discrepancy <= cfg.threshold))
                .collect::<Result<_>>()?;
            Ok((ok[0], ok.iter().all(|&b| b)))
        })
        .collect::<Result<_>>()?;
    let n = cfg.ensembles as f64;
    let p = outcomes.iter().filter(|o| o.0).count() as f64 / n;
    let j = outcomes.iter().filter(|o| o.1).count() as f64 / n;
    let m = cfg.members as i32;
    let g = f64::from(m) * p.powi(m - 1);
    // joint success implies first-member success, so Cov = j (1 - p)
    let var = j * (1.0 - j) + g * g * p * (1.0 - p) - 2.0 * g * j * (1.0 - p);
    Ok(AmplificationReport {
        ensembles: cfg.ensembles,
        members: cfg.members,
        threshold: cfg.threshold,
        single: p,
        joint: j,
        single_pow: p.powi(m),
        std_error: (var.max(0.0) / n).sqrt(),
    })
}

/// Empirical `q`-quantile of the discrepancy reached by `alg` on fresh
/// instances; used to place a success threshold near a target rate.
pub fn discrepancy_quantile(
    alg: OnlineAlg,
    rows: usize,
    cols: usize,
    disorder: Disorder,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 || !(0.0..=1.0).contains(&q) {
        return param("need trials > 0 and q in [0, 1]");
    }
    let mut vals = (0..trials as u64)
        .map(|i| {
            let s = rng::derive_seed(seed, i);
            Ok(alg.solve(&crate::generate(rows, cols, disorder, s)?, s)?.discrepancy)
        })
        .collect::<Result<Vec<f64>>>()?;
    vals.sort_by(f64::total_cmp);
    let idx = ((trials - 1) as f64 * q).round() as usize;
    Ok(vals[idx])
}
