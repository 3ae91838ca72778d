use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ogp_cli::experiment::{online_omega, rerun_manifest, run_experiment, ExperimentConfig, Manifest, SeedRange};
use ogp_cli::output::{emit, emit_report, to_json, Format, OnlineRecord};
use ogp_core::landscape::{
    angle_grid, default_ogp_max_n, overlap_histogram, search_ogp_tuples, search_xi_disc, search_xi_sbp,
    stability_probe, stable_angle_grid, InterpolatedFamily, OgpWindow, StabilityConfig, DEFAULT_XI_MAX_N,
};
use ogp_core::theory::{
    alpha_c, berry_esseen_bound, c_u_bernoulli, covariance_analysis, expected_tuple_count_general,
    expected_xi_count, find_ogp_params, gaussian_box_bound, mc_box_probability, psi_disc, psi_sbp,
    stable_constants, upsilon, CountingForm, CovarianceSpec, DiscExponentParams, GeneralCountParams, C_U,
    MC_MIN_SAMPLES,
};
use ogp_core::{
    disc_value, enumerate_within, exact_discrepancy, generate, rng, sbp_threshold, BodyFormat, Disorder,
    EnsembleSpec, Instance, OnlineAlg, SignVector, DEFAULT_ENUMERATE_MAX_N, DEFAULT_EXACT_MAX_N,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ogp", version, about = "Random discrepancy and perceptron instances, solvers, and landscape probes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sample or trial count, where the command draws samples.
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Output file (a directory for `experiment`). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for outputs when --out is absent.
    #[arg(long, global = true, env = "OGP_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn target(&self, default_name: &str) -> Option<PathBuf> {
        match (&self.out, &self.out_dir) {
            (Some(p), _) => Some(p.clone()),
            (None, Some(dir)) => Some(dir.join(default_name)),
            (None, None) => None,
        }
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw an instance and write it to a file.
    Gen(GenArgs),
    /// Exact discrepancy by exhaustive search.
    Disc(DiscArgs),
    /// Perceptron solutions: count them, list them, or test one sign vector.
    Sbp(SbpArgs),
    /// Run an online algorithm over a range of seeds.
    Online(OnlineArgs),
    #[command(subcommand)]
    Landscape(LandscapeCmd),
    #[command(subcommand)]
    Theory(TheoryCmd),
    /// Run or re-run a sweep described by a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Read the instance from a file written by `gen` instead of drawing one.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    rows: usize,
    #[arg(long, default_value_t = 16)]
    cols: usize,
    /// gaussian, rademacher, or bernoulli:P.
    #[arg(long, default_value = "gaussian")]
    disorder: Disorder,
}

impl InstanceArgs {
    fn load(&self, seed: u64) -> anyhow::Result<Instance> {
        match &self.input {
            Some(p) => {
                let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                Ok(Instance::read_from(BufReader::new(f))?)
            }
            None => Ok(generate(self.rows, self.cols, self.disorder, seed)?),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Body {
    Csv,
    F64le,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = Body::Csv)]
    body: Body,
}

#[derive(Args)]
struct DiscArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = DEFAULT_EXACT_MAX_N)]
    max_n: usize,
}

#[derive(Args)]
struct SbpArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long)]
    kappa: f64,
    /// Test this sign vector (a string of + and -) instead of counting.
    #[arg(long)]
    sigma: Option<SignVector>,
    /// Include every solution in the output.
    #[arg(long)]
    list: bool,
    #[arg(long, default_value_t = DEFAULT_ENUMERATE_MAX_N)]
    max_n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgChoice {
    Greedy,
    Potential,
    Random,
}

#[derive(Args)]
struct AlgArgs {
    #[arg(long, value_enum)]
    alg: AlgChoice,
    /// Potential temperature; defaults to 1/sqrt(M).
    #[arg(long)]
    lambda: Option<f64>,
}

impl AlgArgs {
    fn resolve(&self) -> anyhow::Result<OnlineAlg> {
        let alg = match self.alg {
            AlgChoice::Greedy => OnlineAlg::Greedy,
            AlgChoice::Potential => OnlineAlg::Potential { lambda: self.lambda },
            AlgChoice::Random => OnlineAlg::Random,
        };
        if self.lambda.is_some() && !matches!(alg, OnlineAlg::Potential { .. }) {
            bail!("--lambda only applies to --alg potential");
        }
        alg.validate()?;
        Ok(alg)
    }
}

#[derive(Args)]
struct OnlineArgs {
    #[command(flatten)]
    alg: AlgArgs,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, default_value = "gaussian")]
    disorder: Disorder,
    /// Half-open range A..B; defaults to the single --seed.
    #[arg(long)]
    seeds: Option<SeedRange>,
}

#[derive(Subcommand)]
enum LandscapeCmd {
    /// Histogram of pairwise overlaps among all solutions of one instance.
    Histogram(HistogramArgs),
    /// Shared-prefix tuples of perceptron solutions on a suffix ensemble.
    XiSbp(XiSbpArgs),
    /// Shared-prefix tuples of low-discrepancy colorings on a suffix ensemble.
    XiDisc(XiDiscArgs),
    /// Tuples with all overlaps in a window across an interpolated family.
    Ogp(OgpArgs),
    /// Output distance of an online algorithm on correlated instance pairs.
    Stability(StabilityArgs),
}

#[derive(Args)]
struct HistogramArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Perceptron margin; solutions satisfy |M sigma|_inf <= kappa sqrt(n).
    #[arg(long, conflicts_with = "level")]
    kappa: Option<f64>,
    /// Absolute level; solutions satisfy |M sigma|_inf <= K.
    #[arg(long)]
    level: Option<f64>,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = DEFAULT_ENUMERATE_MAX_N)]
    max_n: usize,
}

#[derive(Args)]
struct SuffixArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Number of resampled trailing columns.
    #[arg(long)]
    k: usize,
    /// Tuple size.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = DEFAULT_XI_MAX_N)]
    max_n: usize,
}

#[derive(Args)]
struct XiSbpArgs {
    #[command(flatten)]
    suffix: SuffixArgs,
    #[arg(long)]
    kappa: f64,
}

#[derive(Args)]
struct XiDiscArgs {
    #[command(flatten)]
    suffix: SuffixArgs,
    #[arg(long, default_value = "rademacher")]
    disorder: Disorder,
    /// Level constant; colorings satisfy |M sigma|_inf <= c_u sqrt(M).
    #[arg(long, default_value_t = C_U)]
    c_u: f64,
}

#[derive(Args)]
struct OgpArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    eta: f64,
    /// Solution level K.
    #[arg(long)]
    level: f64,
    /// Read the level as a perceptron margin, K sqrt(n).
    #[arg(long)]
    sbp: bool,
    /// Angle grid {j pi / (2q)}.
    #[arg(long, default_value_t = 8)]
    grid_q: usize,
    /// Use the grid of the stability constants for this Lipschitz constant.
    /// Its resolution is usually far too fine to search.
    #[arg(long, conflicts_with = "grid_q")]
    stable_lipschitz: Option<f64>,
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Args)]
struct StabilityArgs {
    #[command(flatten)]
    alg: AlgArgs,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Correlation cos(tau) between paired instances.
    #[arg(long)]
    rho: f64,
    /// Success level for |M sigma|_inf.
    #[arg(long)]
    threshold: Option<f64>,
    /// Draw fresh auxiliary randomness for the second instance of each pair.
    #[arg(long)]
    independent_omega: bool,
}

#[derive(Subcommand)]
enum TheoryCmd {
    /// Perceptron capacity.
    AlphaC {
        #[arg(long)]
        kappa: f64,
    },
    /// Perceptron tuple exponent, per unit n.
    PsiSbp {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        kappa: f64,
    },
    /// Discrepancy tuple exponent, in absolute log2 units.
    PsiDisc {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        rows: f64,
        #[arg(long)]
        k: f64,
        /// free-energy or lemma.
        #[arg(long, default_value = "free-energy")]
        form: CountingForm,
    },
    /// OGP parameters for aspect ratios in [c2, C1].
    OgpParams {
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        c2: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
    /// Determinant and spectrum of the perturbed overlap covariance.
    Cov(CovArgs),
    /// Density bound on the box probability next to a Monte Carlo estimate.
    BoxBound {
        #[command(flatten)]
        cov: CovArgs,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        n: f64,
    },
    /// Anti-concentration bound for an interval of the given length.
    BeBound {
        #[arg(long)]
        length: f64,
        #[arg(long)]
        rows: usize,
        /// Bernoulli parameter; Rademacher when absent.
        #[arg(long)]
        p: Option<f64>,
    },
    /// First-moment tuple counts.
    ExpectedCount(CountArgs),
    /// Stability constants C, Q, and log2 log2 T.
    StableConstants {
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        lipschitz: f64,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Args)]
struct CovArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Comma-separated perturbations in pair order; drawn uniformly from
    /// [0, eta] with --seed when absent.
    #[arg(long, value_delimiter = ',')]
    eta_vec: Option<Vec<f64>>,
}

impl CovArgs {
    fn spec(&self, seed: u64) -> anyhow::Result<CovarianceSpec> {
        let pairs = self.m * self.m.saturating_sub(1) / 2;
        let eta_vec = match &self.eta_vec {
            Some(v) => v.clone(),
            None => (0..pairs as u64).map(|i| self.eta * rng::uniform(seed, i, 0)).collect(),
        };
        Ok(CovarianceSpec::new(self.m, self.beta, self.eta, eta_vec)?)
    }
}

#[derive(Args)]
struct CountArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    m: usize,
    /// Suffix length: count shared-prefix tuples of perceptron solutions.
    #[arg(long, requires = "kappa", conflicts_with = "delta")]
    suffix: Option<usize>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Common pairwise Hamming distance: entropy-bound estimate.
    #[arg(long, requires = "level")]
    delta: Option<usize>,
    /// Level K of the general estimate; box half-width K / sqrt(n).
    #[arg(long)]
    level: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON config; --seeds, --seed, --samples, and --out override its fields.
    #[arg(long, required_unless_present = "rerun")]
    config: Option<PathBuf>,
    /// Re-run the config recorded in a manifest and compare output hashes.
    #[arg(long, conflicts_with = "config")]
    rerun: Option<PathBuf>,
    #[arg(long)]
    seeds: Option<SeedRange>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let c = &cli.common;
    let seed = c.seed();
    match cli.cmd {
        Cmd::Gen(a) => {
            if a.instance.input.is_some() {
                bail!("gen draws a new instance; --input is not accepted");
            }
            let inst = a.instance.load(seed)?;
            let (body, ext) = match a.body {
                Body::Csv => (BodyFormat::Csv, "csv"),
                Body::F64le => (BodyFormat::F64Le, "bin"),
            };
            let mut buf = Vec::new();
            inst.write_to(&mut buf, body)?;
            match c.target(&format!("instance-seed{seed}.{ext}")) {
                Some(p) => write_bytes(&p, &buf)?,
                None => std::io::Write::write_all(&mut std::io::stdout(), &buf)?,
            }
        }
        Cmd::Disc(a) => {
            let inst = a.instance.load(seed)?;
            let r = exact_discrepancy(&inst, a.max_n)?;
            emit_report(&r, c.format(Format::Json), Some(&r), c.target(&format!("disc-seed{seed}.json")).as_deref())?;
        }
        Cmd::Sbp(a) => {
            let inst = a.instance.load(seed)?;
            let threshold = sbp_threshold(a.kappa, inst.cols());
            let report = match &a.sigma {
                Some(sigma) => {
                    let member = ogp_core::sbp_membership(&inst, sigma, a.kappa)?;
                    SbpReport {
                        kappa: a.kappa,
                        threshold,
                        count: None,
                        solutions: None,
                        sigma: Some(sigma.clone()),
                        value: Some(disc_value(&inst, sigma)?.value),
                        member: Some(member),
                    }
                }
                None => {
                    let sols = ogp_core::enumerate_solutions(&inst, a.kappa, a.max_n)?;
                    SbpReport {
                        kappa: a.kappa,
                        threshold,
                        count: Some(sols.len() as u64),
                        solutions: a.list.then_some(sols),
                        sigma: None,
                        value: None,
                        member: None,
                    }
                }
            };
            json_out(c, &report, &format!("sbp-seed{seed}.json"))?;
        }
        Cmd::Online(a) => {
            let alg = a.alg.resolve()?;
            let seeds = a.seeds.unwrap_or(SeedRange::single(seed));
            let records = seeds
                .iter()
                .map(|s| {
                    let inst = generate(a.rows, a.cols, a.disorder, s)?;
                    let run = alg.solve(&inst, online_omega(s))?;
                    Ok(OnlineRecord { seed: s, algorithm: run.algorithm, discrepancy: run.discrepancy, signs: run.signs })
                })
                .collect::<ogp_core::Result<Vec<_>>>()?;
            emit_report(&records, c.format(Format::Json), Some(&records), c.target(&format!("online-{alg}-{seeds}.json")).as_deref())?;
        }
        Cmd::Landscape(l) => landscape(c, l)?,
        Cmd::Theory(t) => theory(c, t)?,
        Cmd::Experiment(a) => return experiment(c, a),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SbpReport {
    kappa: f64,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solutions: Option<Vec<SignVector>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<SignVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    member: Option<bool>,
}

#[derive(Serialize)]
struct OgpReport {
    window: OgpWindow,
    angles: usize,
    max_n: usize,
    certificate: Option<ogp_core::landscape::TupleCertificate>,
}

fn json_out<T: Serialize>(c: &Common, value: &T, default_name: &str) -> anyhow::Result<()> {
    emit_report(value, c.format(Format::Json), None, c.target(default_name).as_deref())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn landscape(c: &Common, cmd: LandscapeCmd) -> anyhow::Result<()> {
    let seed = c.seed();
    match cmd {
        LandscapeCmd::Histogram(a) => {
            let inst = a.instance.load(seed)?;
            let sols = match (a.kappa, a.level) {
                (Some(kappa), None) => ogp_core::enumerate_solutions(&inst, kappa, a.max_n)?,
                (None, Some(level)) => enumerate_within(&inst, level, a.max_n)?,
                _ => bail!("give exactly one of --kappa or --level"),
            };
            let h = overlap_histogram(&sols, a.bins)?;
            emit_report(&h, c.format(Format::Csv), Some(&h), c.target(&format!("histogram-seed{seed}.csv")).as_deref())?;
        }
        LandscapeCmd::XiSbp(a) => {
            let s = &a.suffix;
            let members = EnsembleSpec::suffix(s.rows, s.cols, Disorder::Gaussian, s.k, s.m, seed).build()?;
            let r = search_xi_sbp(&members, s.k, a.kappa, s.max_n)?;
            json_out(c, &r, &format!("xi-sbp-seed{seed}.json"))?;
        }
        LandscapeCmd::XiDisc(a) => {
            let s = &a.suffix;
            let members = EnsembleSpec::suffix(s.rows, s.cols, a.disorder, s.k, s.m, seed).build()?;
            let r = search_xi_disc(&members, s.k, a.c_u, s.max_n)?;
            json_out(c, &r, &format!("xi-disc-seed{seed}.json"))?;
        }
        LandscapeCmd::Ogp(a) => {
            let window = OgpWindow { beta: a.beta, eta: a.eta, k: a.level, m: a.m, sbp: a.sbp };
            window.validate()?;
            let angles = match a.stable_lipschitz {
                Some(l) => stable_angle_grid(a.eta, l, a.m)?,
                None => angle_grid(a.grid_q)?,
            };
            let n_angles = angles.len();
            let max_n = a.max_n.unwrap_or_else(|| default_ogp_max_n(a.m));
            let family = InterpolatedFamily::generate(a.rows, a.cols, a.m, angles, seed)?;
            let certificate = search_ogp_tuples(&family, &window, max_n)?;
            json_out(c, &OgpReport { window, angles: n_angles, max_n, certificate }, &format!("ogp-seed{seed}.json"))?;
        }
        LandscapeCmd::Stability(a) => {
            let alg = a.alg.resolve()?;
            let cfg = StabilityConfig {
                rows: a.rows,
                cols: a.cols,
                rho: a.rho,
                trials: c.samples.unwrap_or(ogp_cli::experiment::DEFAULT_TRIALS) as usize,
                threshold: a.threshold,
                seed,
                shared_omega: !a.independent_omega,
            };
            let r = stability_probe(alg, &cfg)?;
            emit_report(&r, c.format(Format::Json), Some(&r), c.target(&format!("stability-{alg}-seed{seed}.json")).as_deref())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct Scalar<'a> {
    quantity: &'a str,
    value: f64,
    params: serde_json::Value,
}

#[derive(Serialize)]
struct BoxBoundReport {
    bound: f64,
    half_width: f64,
    monte_carlo: ogp_core::theory::McEstimate,
    spec: CovarianceSpec,
}

fn theory(c: &Common, cmd: TheoryCmd) -> anyhow::Result<()> {
    let seed = c.seed();
    let fmt = c.format(Format::Json);
    match cmd {
        TheoryCmd::AlphaC { kappa } => {
            let v = Scalar { quantity: "alpha_c", value: alpha_c(kappa)?, params: serde_json::json!({ "kappa": kappa }) };
            json_out(c, &v, "alpha-c.json")?;
        }
        TheoryCmd::PsiSbp { delta, m, alpha, kappa } => {
            let mut r = psi_sbp(delta, m, alpha, kappa)?;
            r.params.insert("upsilon".into(), upsilon(delta, alpha, kappa)?);
            emit_report(&r, fmt, Some(&r), c.target("psi-sbp.json").as_deref())?;
        }
        TheoryCmd::PsiDisc { m, beta, eta, c: cc, n, rows, k, form } => {
            let r = psi_disc(&DiscExponentParams { m, beta, eta, c: cc, n, rows, k, form })?;
            emit_report(&r, fmt, Some(&r), c.target("psi-disc.json").as_deref())?;
        }
        TheoryCmd::OgpParams { c1, c2, k } => json_out(c, &find_ogp_params(c1, c2, k)?, "ogp-params.json")?,
        TheoryCmd::Cov(a) => json_out(c, &covariance_analysis(&a.spec(seed)?)?, "cov.json")?,
        TheoryCmd::BoxBound { cov, k, n } => {
            let spec = cov.spec(seed)?;
            let bound = gaussian_box_bound(&spec, k, n)?;
            let half_width = k / n.sqrt();
            let samples = c.samples.unwrap_or(100 * MC_MIN_SAMPLES);
            let monte_carlo = mc_box_probability(&spec.materialize(), half_width, samples, seed)?;
            json_out(c, &BoxBoundReport { bound, half_width, monte_carlo, spec }, "box-bound.json")?;
        }
        TheoryCmd::BeBound { length, rows, p } => {
            let c_u = match p {
                Some(p) => c_u_bernoulli(p)?,
                None => C_U,
            };
            let v = Scalar {
                quantity: "berry_esseen_bound",
                value: berry_esseen_bound(length, rows, p)?,
                params: serde_json::json!({ "length": length, "rows": rows, "p": p, "c_u": c_u }),
            };
            json_out(c, &v, "be-bound.json")?;
        }
        TheoryCmd::ExpectedCount(a) => {
            let r = match (a.suffix, a.delta) {
                (Some(k), None) => expected_xi_count(a.n, a.rows, k, a.m, a.kappa.expect("required by clap"))?,
                (None, Some(delta)) => expected_tuple_count_general(&GeneralCountParams {
                    n: a.n,
                    rows: a.rows,
                    m: a.m,
                    delta,
                    k: a.level.expect("required by clap"),
                    mc_samples: c.samples.unwrap_or(100 * MC_MIN_SAMPLES),
                    seed,
                })?,
                _ => bail!("give exactly one of --suffix or --delta"),
            };
            json_out(c, &r, "expected-count.json")?;
        }
        TheoryCmd::StableConstants { eta, lipschitz, m } => {
            json_out(c, &stable_constants(eta, lipschitz, m)?, "stable-constants.json")?
        }
    }
    Ok(())
}

fn experiment(c: &Common, a: ExperimentArgs) -> anyhow::Result<ExitCode> {
    if let Some(path) = a.rerun {
        let manifest = Manifest::from_file(&path)?;
        let dir = c
            .out
            .clone()
            .or_else(|| c.out_dir.clone())
            .context("--rerun needs --out (or OGP_OUT_DIR) for the fresh outputs")?;
        if manifest.config.out_dir.as_deref() == Some(dir.as_path()) {
            bail!("re-run into a different directory than the original outputs");
        }
        let (_, mismatches) = rerun_manifest(&manifest, &dir)?;
        emit(&to_json(&mismatches)?, None)?;
        return Ok(if mismatches.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    let path = a.config.expect("required by clap");
    let mut config = ExperimentConfig::from_file(&path)?;
    if let Some(s) = a.seeds {
        config.seeds = s;
    } else if let Some(s) = c.seed {
        config.seeds = SeedRange::single(s);
    }
    if c.samples.is_some() {
        config.samples = c.samples;
    }
    if let Some(out) = c.out.clone() {
        config.out_dir = Some(out);
    } else if config.out_dir.is_none() {
        config.out_dir = c.out_dir.clone();
    }
    let manifest = run_experiment(&config)?;
    emit(&to_json(&manifest)?, None)?;
    let failed = manifest.failures();
    if failed > 0 {
        eprintln!("{failed} of {} tasks failed; see the manifest", manifest.tasks.len());
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
