//! Acceptance suite: one PASS/FAIL line per criterion, with wall time
//! checked against the criterion's budget. Exits nonzero on any failure.

use std::time::{Duration, Instant};

use ogp_core::discrepancy::{count_within, disc_value, exact_discrepancy, sbp_threshold};
use ogp_core::landscape::{
    angle_grid, search_ogp_tuples, search_xi_disc, search_xi_sbp, InterpolatedFamily, OgpWindow,
};
use ogp_core::online::{amplification, discrepancy_quantile, AmplificationConfig};
use ogp_core::rng::{self, derive_seed, uniform};
use ogp_core::theory::{
    alpha_c, berry_esseen_bound, box_density_bound, c_u_bernoulli, covariance_analysis, expected_xi_count,
    find_ogp_params, interval_frequency, mc_box_probability, psi_disc, signed_sum_samples, stable_constants,
    upsilon, CountingForm, CovarianceSpec, DiscExponentParams, C_U,
};
use ogp_core::{generate, Disorder, EnsembleSpec, Instance, OnlineAlg, SignVector};

// arbitrary-precision reference values
const PHI_INV_3_4: f64 = 0.674_489_750_196_081_743_2;
const PHI_INV_5_8: f64 = 0.318_639_363_964_375_163_0;
const MASS_AT_1: f64 = 0.682_689_492_137_085_897_17;
const TAG: u32 = 0x0ACC;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn u(seed: u64, i: u64) -> f64 {
    uniform(seed, i, TAG)
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Row sums by the textbook double loop.
fn naive_row_sums(inst: &Instance, mask: u64) -> Vec<f64> {
    (0..inst.rows())
        .map(|r| {
            (0..inst.cols())
                .map(|c| if mask >> c & 1 == 1 { -inst.get(r, c) } else { inst.get(r, c) })
                .sum()
        })
        .collect()
}

fn naive_ok(inst: &Instance, mask: u64, threshold: f64) -> bool {
    naive_row_sums(inst, mask).iter().all(|x| x.abs() <= threshold)
}

fn c1_capacity() -> Outcome {
    let a = alpha_c(PHI_INV_3_4).unwrap();
    let b = alpha_c(PHI_INV_5_8).unwrap();
    let c = alpha_c(1.0).unwrap();
    let oracle = -1.0 / MASS_AT_1.log2();
    let pass = (a - 1.0).abs() < 1e-12
        && (b - 0.5).abs() < 1e-12
        && (c - 1.8157).abs() < 1e-3
        && (c - oracle).abs() < 1e-12;
    outcome(pass, format!("alpha_c: {a:.15}, {b:.15}, alpha_c(1) = {c:.10} (oracle {oracle:.10})"))
}

fn c2_upsilon() -> Outcome {
    let l = (2.0 * std::f64::consts::PI).ln() / std::f64::consts::LN_2;
    let mut worst = 0.0f64;
    for i in 1..=50 {
        let k = 0.24 * i as f64 / 50.0;
        let v = upsilon(4.0 * k * k, 4.0 * k * k, k).unwrap();
        let expect = -k * k * (2.0 * l - 4.0);
        worst = worst.max((v / expect - 1.0).abs());
    }
    outcome(worst < 1e-10, format!("max relative error {worst:.2e} over 50 kappa"))
}

fn c3_ogp_negativity() -> Outcome {
    let p = find_ogp_params(1.0, 0.5, 1.0).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for e in 8..=20 {
        let rows = (1u64 << e) as f64;
        for j in 0..10 {
            let c = 0.5 + 0.5 * j as f64 / 9.0;
            let n = c * rows * rows.log2();
            let r = psi_disc(&DiscExponentParams {
                m: p.m,
                beta: p.beta,
                eta: p.eta,
                c: p.c,
                n,
                rows,
                k: 1.0,
                form: CountingForm::FreeEnergy,
            })
            .unwrap();
            worst = worst.max(r.value / n);
        }
    }
    let pd = p.eta < (1.0 - p.beta) / p.m as f64;
    outcome(
        worst < 0.0 && pd,
        format!("m* = {}, 1-beta* = {:.6}, largest psi_disc / n = {worst:.4}", p.m, 1.0 - p.beta),
    )
}

fn c4_determinant() -> Outcome {
    let mut violations = 0;
    let mut min_ratio = f64::INFINITY;
    let mut oracle_gap = 0.0f64;
    for t in 0..1000u64 {
        let s = derive_seed(4, t);
        let m = 2 + (t % 7) as usize;
        let beta = 0.02 + 0.96 * u(s, 0);
        let eta = CovarianceSpec::admissible_eta(m, beta).min(beta / 2.0);
        let eta_vec = (0..m * (m - 1) / 2).map(|i| eta * u(s, 1 + i as u64)).collect();
        let spec = CovarianceSpec::new(m, beta, eta, eta_vec).unwrap();
        let a = covariance_analysis(&spec).unwrap();
        let sigma = spec.materialize();
        let dm = nalgebra::DMatrix::from_fn(m, m, |i, j| sigma[(i, j)]);
        let eig_det: f64 = dm.symmetric_eigen().eigenvalues.iter().product();
        oracle_gap = oracle_gap.max((a.det / eig_det - 1.0).abs());
        if !a.pd || a.det < a.det_lower_bound {
            violations += 1;
        }
        min_ratio = min_ratio.min(a.det / a.det_lower_bound);
    }
    outcome(
        violations == 0 && oracle_gap < 1e-9,
        format!("{violations} violations, min det/bound = {min_ratio:.3}, eigen-oracle gap {oracle_gap:.1e}"),
    )
}

fn c5_box_bound() -> Outcome {
    let mut fails = 0;
    let mut max_z = f64::NEG_INFINITY;
    for t in 0..50u64 {
        let s = derive_seed(5, t);
        let m = 1 + (t % 4) as usize;
        let beta = 0.1 + 0.8 * u(s, 0);
        let eta = CovarianceSpec::admissible_eta(m, beta).min(beta / 2.0);
        let eta_vec = (0..m * (m - 1) / 2).map(|i| eta * u(s, 1 + i as u64)).collect();
        let spec = CovarianceSpec::new(m, beta, eta, eta_vec).unwrap();
        let h = 0.05 + 0.95 * u(s, 100);
        let cov = spec.materialize();
        let bound = box_density_bound(&cov, h).unwrap();
        let est = mc_box_probability(&cov, h, 1_000_000, s).unwrap();
        if est.estimate > bound + 3.0 * est.std_error {
            fails += 1;
        }
        if est.std_error > 0.0 {
            max_z = max_z.max((est.estimate - bound) / est.std_error);
        }
    }
    outcome(fails == 0, format!("{fails} of 50 specs exceed bound + 3 SE; max (est - bound)/SE = {max_z:.1}"))
}

fn c6_berry_esseen() -> Outcome {
    let rows = 100usize;
    let sqrt_m = (rows as f64).sqrt();
    let rad = berry_esseen_bound(2.0 * C_U * sqrt_m, rows, None).unwrap();
    let mut quarter = rad == 0.25;
    for p in [0.2, 0.5, 0.7] {
        let b = berry_esseen_bound(2.0 * c_u_bernoulli(p).unwrap() * sqrt_m, rows, Some(p)).unwrap();
        quarter &= (b - 0.25).abs() <= 2.0 * f64::EPSILON;
    }
    let mut worst_gap = f64::NEG_INFINITY;
    let mut checked = 0;
    let mut violations = 0;
    for (case, disorder) in [Disorder::Rademacher, Disorder::Bernoulli { p: 0.5 }, Disorder::Bernoulli { p: 0.2 }]
        .into_iter()
        .enumerate()
    {
        let s = derive_seed(6, case as u64);
        let signs: Vec<i8> = (0..rows).map(|i| if rng::coin(s, i as u64, TAG) { 1 } else { -1 }).collect();
        let sums = signed_sum_samples(&signs, disorder, 100_000, s).unwrap();
        let (p, var) = match disorder {
            Disorder::Bernoulli { p } => (Some(p), rows as f64 * (p - p * p)),
            _ => (None, rows as f64),
        };
        let mean = match disorder {
            Disorder::Bernoulli { p } => p * signs.iter().map(|&x| f64::from(x)).sum::<f64>(),
            _ => 0.0,
        };
        let c = match p {
            Some(p) => c_u_bernoulli(p).unwrap(),
            None => C_U,
        };
        // lengths from 2 c sqrt(M) up to where the bound reaches 1
        let (lo_len, hi_len) = (2.0 * c * sqrt_m, var.sqrt() / 3.0);
        for i in 0..400u64 {
            let len = lo_len + (hi_len - lo_len) * u(s, 1000 + i);
            let centre = mean + 3.0 * var.sqrt() * (2.0 * u(s, 5000 + i) - 1.0);
            let freq = interval_frequency(&sums, centre - len / 2.0, centre + len / 2.0);
            let bound = berry_esseen_bound(len, rows, p).unwrap();
            checked += 1;
            if freq > bound {
                violations += 1;
            }
            worst_gap = worst_gap.max(freq - bound);
        }
    }
    outcome(
        quarter && violations == 0,
        format!("bound at 2C_u sqrt(M) = {rad}; {violations}/{checked} intervals exceed bound (max excess {worst_gap:.3})"),
    )
}

fn c7_first_moment() -> Outcome {
    let (n, rows, kappa) = (14usize, 4usize, 1.0);
    let thr = sbp_threshold(kappa, n);
    let counts: Vec<f64> = (0..2000u64)
        .map(|s| count_within(&generate(rows, n, Disorder::Gaussian, derive_seed(7, s)).unwrap(), thr, 26).unwrap() as f64)
        .collect();
    let (mean, se) = mean_se(&counts);
    let expect = 2f64.powi(n as i32) * MASS_AT_1.powi(rows as i32);
    let sbp_ok = (mean - expect).abs() <= 3.0 * se;

    let (k, m) = (4usize, 2usize);
    let xi: Vec<f64> = (0..2000u64)
        .map(|s| {
            let members = EnsembleSpec::suffix(rows, n, Disorder::Gaussian, k, m, derive_seed(70, s)).build().unwrap();
            search_xi_sbp(&members, k, kappa, 22).unwrap().count as f64
        })
        .collect();
    let (xmean, xse) = mean_se(&xi);
    let xexpect = expected_xi_count(n, rows, k, m, kappa).unwrap().value;
    let xi_ok = (xmean - xexpect).abs() <= 3.0 * xse;
    outcome(
        sbp_ok && xi_ok,
        format!(
            "|S|: mean {mean:.2} +- {se:.2} vs {expect:.2}; |Xi|: mean {xmean:.2} +- {xse:.2} vs {xexpect:.2}"
        ),
    )
}

fn c8_exact_solver() -> Outcome {
    let disorders = [Disorder::Gaussian, Disorder::Rademacher, Disorder::Bernoulli { p: 0.3 }];
    let mut mismatches = 0;
    for t in 0..200u64 {
        let s = derive_seed(8, t);
        let disorder = disorders[(t % 3) as usize];
        let n = 2 + (u(s, 0) * 13.0) as usize;
        let rows = 1 + (u(s, 1) * 6.0) as usize;
        let inst = generate(rows, n, disorder, s).unwrap();
        let naive = (0..1u64 << n)
            .map(|mask| naive_row_sums(&inst, mask).iter().fold(0.0f64, |a, x| a.max(x.abs())))
            .fold(f64::INFINITY, f64::min);
        let got = exact_discrepancy(&inst, 30).unwrap();
        let ok = if disorder.is_integer() {
            got.value == naive
        } else {
            (got.value - naive).abs() <= 1e-12 * naive.max(f64::MIN_POSITIVE)
        };
        let consistent = disc_value(&inst, &got.argmin).unwrap().value == got.value;
        if !ok || !consistent {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches over 200 instances"))
}

fn splice(a: &Instance, b: &Instance, t: usize) -> Instance {
    let (rows, cols) = (a.rows(), a.cols());
    let pick = |r: usize, c: usize| if c < t { a.get(r, c) } else { b.get(r, c) };
    if a.disorder().is_integer() {
        let data = (0..rows * cols).map(|i| pick(i / cols, i % cols) as i8).collect();
        Instance::from_integer(rows, cols, a.disorder(), data).unwrap()
    } else {
        Instance::from_real(rows, cols, (0..rows * cols).map(|i| pick(i / cols, i % cols)).collect()).unwrap()
    }
}

fn c9_online_contract() -> Outcome {
    let (rows, n) = (8usize, 60usize);
    let disorders = [Disorder::Gaussian, Disorder::Rademacher, Disorder::Bernoulli { p: 0.4 }];
    let mut violations = 0;
    let mut checks = 0;
    for alg in OnlineAlg::ALL {
        for pair in 0..50u64 {
            let disorder = disorders[(pair % 3) as usize];
            let a = generate(rows, n, disorder, derive_seed(9, 2 * pair)).unwrap();
            let b = generate(rows, n, disorder, derive_seed(9, 2 * pair + 1)).unwrap();
            let omega = derive_seed(90, pair);
            let full = alg.solve(&a, omega).unwrap().signs;
            for j in 0..20 {
                let t = 1 + j * (n - 1) / 19;
                let spliced = alg.solve(&splice(&a, &b, t), omega).unwrap().signs;
                checks += 1;
                if full.as_slice()[..t] != spliced.as_slice()[..t] {
                    violations += 1;
                }
            }
        }
    }
    let stream = generate(1, 10_000, Disorder::Rademacher, 99).unwrap();
    let signs = OnlineAlg::Greedy.solve(&stream, 0).unwrap().signs;
    let mut partial = 0.0f64;
    let mut peak = 0.0f64;
    for (t, &s) in signs.as_slice().iter().enumerate() {
        partial += f64::from(s) * stream.get(0, t);
        peak = peak.max(partial.abs());
    }
    outcome(
        violations == 0 && peak <= 1.0,
        format!("{violations}/{checks} prefix violations; greedy M=1 peak |partial sum| = {peak}"),
    )
}

fn c10_separation() -> Outcome {
    let (rows, n) = (32usize, 1024usize);
    let runs: Vec<(f64, f64)> = (0..200u64)
        .map(|s| {
            let inst = generate(rows, n, Disorder::Rademacher, derive_seed(10, s)).unwrap();
            let pot = OnlineAlg::Potential { lambda: None }.solve(&inst, s).unwrap().discrepancy;
            let rnd = OnlineAlg::Random.solve(&inst, derive_seed(100, s)).unwrap().discrepancy;
            (pot, rnd)
        })
        .collect();
    let mp = median(runs.iter().map(|r| r.0).collect());
    let mr = median(runs.iter().map(|r| r.1).collect());
    outcome(mp <= mr, format!("median discrepancy: potential {mp}, random signing {mr}"))
}

fn c11_amplification() -> Outcome {
    let (rows, n, m) = (6usize, 24usize, 3usize);
    let k = n / 4;
    let mut pass = true;
    let mut lines = Vec::new();
    for alg in [OnlineAlg::Greedy, OnlineAlg::Potential { lambda: None }] {
        let threshold = discrepancy_quantile(alg, rows, n, Disorder::Gaussian, 0.5, 2001, 11).unwrap();
        let cfg = AmplificationConfig {
            rows,
            cols: n,
            disorder: Disorder::Gaussian,
            k,
            members: m,
            threshold,
            ensembles: 10_000,
            seed: 110,
        };
        let r = amplification(alg, &cfg).unwrap();
        pass &= r.holds(3.0);
        lines.push(format!(
            "{alg}: kappa = {:.3}, single {:.4}, joint {:.4} vs single^3 {:.4} (SE {:.4})",
            threshold / (n as f64).sqrt(),
            r.single,
            r.joint,
            r.single_pow,
            r.std_error
        ));
    }
    outcome(pass, lines.join("; "))
}

/// Existence of a suffix-sharing tuple by scanning the full product space.
fn naive_xi_exists(members: &[Instance], k: usize, threshold: f64) -> bool {
    let n = members[0].cols();
    let shared_mask = (1u64 << (n - k)) - 1;
    let ok: Vec<Vec<u64>> = members
        .iter()
        .map(|inst| (0..1u64 << n).filter(|&x| naive_ok(inst, x, threshold)).collect())
        .collect();
    fn rec(ok: &[Vec<u64>], chosen: &mut Vec<u64>, shared_mask: u64) -> bool {
        if chosen.len() == ok.len() {
            return true;
        }
        for &x in &ok[chosen.len()] {
            if chosen.iter().all(|&y| (x ^ y) & shared_mask == 0) {
                chosen.push(x);
                if rec(ok, chosen, shared_mask) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(&ok, &mut Vec::new(), shared_mask)
}

fn naive_ogp_exists(family: &InterpolatedFamily, w: &OgpWindow) -> bool {
    let n = family.base.cols();
    let threshold = w.threshold(n);
    let members: Vec<Vec<SignVector>> = (0..w.m)
        .map(|i| {
            let insts: Vec<Instance> = family.angles.iter().map(|&t| family.member(i, t).unwrap()).collect();
            (0..1u64 << n)
                .filter(|&x| insts.iter().any(|inst| naive_ok(inst, x, threshold)))
                .map(|x| SignVector::from_mask(x, n))
                .collect()
        })
        .collect();
    let inside = |a: &SignVector, b: &SignVector| {
        let dot: i64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| i64::from(x * y)).sum();
        let o = dot as f64 / n as f64;
        o >= w.beta - w.eta - 1e-9 && o <= w.beta + 1e-9
    };
    fn rec(members: &[Vec<SignVector>], chosen: &mut Vec<SignVector>, inside: &dyn Fn(&SignVector, &SignVector) -> bool) -> bool {
        if chosen.len() == members.len() {
            return true;
        }
        for x in &members[chosen.len()] {
            if chosen.iter().all(|y| inside(x, y)) {
                chosen.push(x.clone());
                if rec(members, chosen, inside) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    rec(&members, &mut Vec::new(), &inside)
}

fn c12_landscape() -> Outcome {
    let mut cases = 0;
    let mut disagreements = 0;
    let mut found = 0;
    let mut record = |search: bool, naive: bool| {
        cases += 1;
        found += usize::from(search);
        if search != naive {
            disagreements += 1;
        }
    };
    for t in 0..24u64 {
        let s = derive_seed(12, t);
        let (n, m) = if t % 4 == 3 { (8usize, 3usize) } else { (10 + 2 * (t % 2) as usize, 2usize) };
        let k = 2 + (t % 3) as usize;
        let members = EnsembleSpec::suffix(4, n, Disorder::Gaussian, k, m, s).build().unwrap();
        for kappa in [0.3, 0.6, 1.0] {
            let got = search_xi_sbp(&members, k, kappa, 22).unwrap();
            if let Some(c) = &got.certificate {
                assert!(c.verify(&members, None).unwrap());
            }
            record(got.certificate.is_some(), naive_xi_exists(&members, k, sbp_threshold(kappa, n)));
        }
        let disorder = if t % 2 == 0 { Disorder::Rademacher } else { Disorder::Bernoulli { p: 0.5 } };
        let rows = 4;
        let members = EnsembleSpec::suffix(rows, n, disorder, rows, m, s).build().unwrap();
        for c_u in [0.5, 1.0, 1.5] {
            let got = search_xi_disc(&members, rows, c_u, 22).unwrap();
            record(got.certificate.is_some(), naive_xi_exists(&members, rows, c_u * (rows as f64).sqrt()));
        }
    }
    for t in 0..16u64 {
        let s = derive_seed(120, t);
        let (n, m) = if t % 4 == 3 { (7usize, 3usize) } else { (9 + (t % 2) as usize, 2usize) };
        let family = InterpolatedFamily::generate(3, n, m, angle_grid(3).unwrap(), s).unwrap();
        for (beta, eta, kappa) in [(0.6, 0.2, 0.5), (0.9, 0.1, 0.7), (0.3, 0.3, 1.0), (1.0, 0.0, 0.4)] {
            let w = OgpWindow { beta, eta, k: kappa, m, sbp: true };
            let got = search_ogp_tuples(&family, &w, 12).unwrap();
            record(got.is_some(), naive_ogp_exists(&family, &w));
        }
    }
    outcome(
        disagreements == 0,
        format!("{disagreements} disagreements over {cases} searches ({found} non-empty)"),
    )
}

fn c13_stable_constants() -> Outcome {
    let mut pass = true;
    let mut worst = 0.0f64;
    for &eta in &[0.05, 0.1, 0.4, 0.9] {
        for &l in &[0.5, 1.0, 3.0] {
            for m in [2usize, 5, 16] {
                let s = stable_constants(eta, l, m).unwrap();
                let q = 4800.0 * l * std::f64::consts::PI / (eta * eta);
                pass &= s.c == eta * eta / 1600.0 && s.q == q;
                let expect = 4.0 * m as f64 * q * q.ln() / std::f64::consts::LN_2;
                worst = worst.max((s.log2_log2_t / expect - 1.0).abs());
            }
        }
    }
    let s = stable_constants(0.4, 1.0, 2).unwrap();
    pass &= (s.q / 94_247.779_607_693_797 - 1.0).abs() < 1e-14;
    pass &= (s.log2_log2_t / 12_458_931.420_208_754 - 1.0).abs() < 1e-12;
    outcome(pass && worst < 1e-12, format!("max relative error of log2 log2 T {worst:.1e}; Q(0.4, 1) = {}", s.q))
}

type Criterion = (&'static str, u64, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("capacity identities", 1, c1_capacity),
        ("upsilon anchor", 1, c2_upsilon),
        ("OGP exponent negativity", 5, c3_ogp_negativity),
        ("determinant bound", 10, c4_determinant),
        ("box-probability bound", 120, c5_box_bound),
        ("Berry-Esseen constants", 30, c6_berry_esseen),
        ("first-moment exactness", 300, c7_first_moment),
        ("exact solver vs naive enumeration", 120, c8_exact_solver),
        ("online contract", 30, c9_online_contract),
        ("online vs random signing", 60, c10_separation),
        ("Jensen amplification", 300, c11_amplification),
        ("landscape searches vs naive oracles", 120, c12_landscape),
        ("stable-constant arithmetic", 1, c13_stable_constants),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let pass = out.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "{} [{:>2}] {name}: {} ({:.3}s of {budget}s{})",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
