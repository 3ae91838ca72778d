use std::path::Path;
use std::process::Command;

use ogp_cli::experiment::{rerun_manifest, run_experiment, ExperimentConfig, Manifest, SeedRange, TaskKind, TaskStatus};
use ogp_cli::output::{to_csv, to_json, OnlineRecord};
use ogp_core::landscape::{overlap_histogram, search_xi_sbp, stability_probe, StabilityConfig, StabilityReport, XiSearch};
use ogp_core::theory::{psi_disc, psi_sbp, CountingForm, DiscExponentParams, ExponentReport};
use ogp_core::{
    enumerate_solutions, exact_discrepancy, generate, DiscrepancyResult, Disorder, EnsembleSpec, OnlineAlg,
};

fn ogp(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_ogp"))
        .args(args)
        .env_remove("OGP_OUT_DIR")
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "ogp {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| rd.map(|e| e.unwrap().file_name().into_string().unwrap()).collect())
        .unwrap_or_default();
    names.sort();
    names
}

fn config(task: TaskKind, start: u64, end: u64, dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        name: None,
        task,
        seeds: SeedRange { start, end },
        out_dir: Some(dir.to_path_buf()),
        samples: None,
    }
}

fn greedy(rows: usize, cols: usize) -> TaskKind {
    TaskKind::Online { rows, cols, disorder: Disorder::Gaussian, algorithm: OnlineAlg::Greedy }
}

#[test]
fn results_round_trip() {
    let inst = generate(4, 12, Disorder::Gaussian, 9).unwrap();
    let disc = exact_discrepancy(&inst, 30).unwrap();
    assert_eq!(serde_json::from_str::<DiscrepancyResult>(&to_json(&disc).unwrap()).unwrap(), disc);

    let members = EnsembleSpec::suffix(3, 12, Disorder::Gaussian, 3, 2, 4).build().unwrap();
    let xi = search_xi_sbp(&members, 3, 1.0, 22).unwrap();
    assert_eq!(serde_json::from_str::<XiSearch>(&to_json(&xi).unwrap()).unwrap(), xi);

    let rep = psi_sbp(0.1, 3, 0.5, 1.0).unwrap();
    assert_eq!(serde_json::from_str::<ExponentReport>(&to_json(&rep).unwrap()).unwrap(), rep);

    let cfg = StabilityConfig { rows: 3, cols: 20, rho: 0.8, trials: 20, threshold: Some(2.0), seed: 1, shared_omega: true };
    let st = stability_probe(OnlineAlg::Potential { lambda: None }, &cfg).unwrap();
    assert_eq!(serde_json::from_str::<StabilityReport>(&to_json(&st).unwrap()).unwrap(), st);

    let cfg_json = to_json(&config(greedy(3, 10), 0, 4, Path::new("out"))).unwrap();
    assert_eq!(serde_json::from_str::<ExperimentConfig>(&cfg_json).unwrap(), config(greedy(3, 10), 0, 4, Path::new("out")));
}

#[test]
fn discrepancy_json_fields() {
    let inst = generate(3, 10, Disorder::Gaussian, 1).unwrap();
    let text = to_json(&exact_discrepancy(&inst, 30).unwrap()).unwrap();
    let at = |k: &str| text.find(&format!("\"{k}\":")).unwrap();
    assert!(text.starts_with("{\"value\":"));
    assert!(at("value") < at("argmin") && at("argmin") < at("row_sums"));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v.as_object().unwrap().len(), 3);
}

#[test]
fn histogram_csv_has_header() {
    let inst = generate(2, 12, Disorder::Gaussian, 5).unwrap();
    let sols = enumerate_solutions(&inst, 1.0, 26).unwrap();
    let csv = to_csv(&overlap_histogram(&sols, 4).unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("bin_lo,bin_hi,count"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn exponent_terms_sum_to_value() {
    let sbp = psi_sbp(0.2, 4, 0.7, 0.8).unwrap();
    let disc = psi_disc(&DiscExponentParams {
        m: 5,
        beta: 0.8,
        eta: 0.02,
        c: 0.2,
        n: 2000.0,
        rows: 300.0,
        k: 1.0,
        form: CountingForm::FreeEnergy,
    })
    .unwrap();
    for r in [sbp, disc] {
        let v: serde_json::Value = serde_json::from_str(&to_json(&r).unwrap()).unwrap();
        let sum: f64 = v["terms"].as_object().unwrap().values().map(|t| t.as_f64().unwrap()).sum();
        let value = v["value"].as_f64().unwrap();
        let scale: f64 = v["terms"].as_object().unwrap().values().map(|t| t.as_f64().unwrap().abs()).sum();
        assert!((sum - value).abs() <= 1e-12 * scale, "{sum} vs {value}");
    }
}

#[test]
fn empty_seed_range_gives_zero_tasks() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_experiment(&config(greedy(3, 10), 5, 5, dir.path())).unwrap();
    assert!(m.tasks.is_empty());
    assert_eq!(files_in(dir.path()), ["manifest.json"]);
}

#[test]
fn three_seed_greedy_sweep_lists_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let m = run_experiment(&config(greedy(4, 16), 10, 13, dir.path())).unwrap();
    assert_eq!(m.tasks.len(), 3);
    assert_eq!(m.tasks.iter().map(|t| t.seed).collect::<Vec<_>>(), [10, 11, 12]);
    for t in &m.tasks {
        assert_eq!(t.status, TaskStatus::Ok);
        let text = std::fs::read_to_string(dir.path().join(&t.file)).unwrap();
        assert_eq!(ogp_cli::experiment::sha256_hex(text.as_bytes()), *t.sha256.as_ref().unwrap());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["seed"], t.seed);
        assert_eq!(v["result"]["algorithm"], "greedy");
    }
    assert_eq!(files_in(dir.path()).len(), 4);
    let on_disk = Manifest::from_file(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(on_disk, m);
}

#[test]
fn rerun_reproduces_hashes() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    for task in [
        greedy(5, 18),
        TaskKind::Online { rows: 5, cols: 18, disorder: Disorder::Rademacher, algorithm: OnlineAlg::Random },
        TaskKind::Disc { rows: 3, cols: 14, disorder: Disorder::Bernoulli { p: 0.3 }, max_n: None },
        TaskKind::XiSbp { rows: 3, cols: 12, k: 3, m: 3, kappa: 1.0, max_n: None },
        TaskKind::Stability {
            rows: 3,
            cols: 30,
            rho: 0.9,
            algorithm: OnlineAlg::Potential { lambda: None },
            threshold: None,
            shared_omega: true,
        },
        TaskKind::BoxProbability { m: 3, beta: 0.6, half_width: 0.4 },
    ] {
        let mut cfg = config(task, 0, 4, first.path());
        cfg.samples = Some(20_000);
        let m = run_experiment(&cfg).unwrap();
        assert_eq!(m.failures(), 0);
        let (fresh, mismatches) = rerun_manifest(&m, second.path()).unwrap();
        assert!(mismatches.is_empty(), "{mismatches:?}");
        assert_eq!(fresh.tasks, m.tasks);
    }
}

#[test]
fn invalid_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let bad = [
        TaskKind::Disc { rows: 2, cols: 40, disorder: Disorder::Gaussian, max_n: None },
        TaskKind::SbpCount { rows: 2, cols: 10, kappa: -1.0, max_n: None },
        TaskKind::Online { rows: 2, cols: 10, disorder: Disorder::Bernoulli { p: 1.5 }, algorithm: OnlineAlg::Greedy },
    ];
    for task in bad {
        assert!(run_experiment(&config(task, 0, 3, &out)).is_err());
        assert!(!out.exists());
    }
    let mut missing_dir = config(greedy(2, 10), 0, 3, &out);
    missing_dir.out_dir = None;
    assert!(run_experiment(&missing_dir).is_err());
}

#[test]
fn per_task_failures_are_recorded() {
    // a directory squatting on seed 1's result path makes only that write fail
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("taken");
    std::fs::create_dir_all(blocker.join("online-seed1.json")).unwrap();
    let m = run_experiment(&config(greedy(2, 8), 0, 3, &blocker)).unwrap();
    let status: Vec<TaskStatus> = m.tasks.iter().map(|t| t.status).collect();
    assert_eq!(status, [TaskStatus::Ok, TaskStatus::Failed, TaskStatus::Ok]);
    assert!(m.tasks[1].error.is_some() && m.tasks[1].sha256.is_none());
}

#[test]
fn online_sweep_via_binary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.json");
    ogp(&[
        "online", "--alg", "greedy", "--rows", "4", "--cols", "20", "--disorder", "rademacher", "--seeds", "0..3",
        "--out", path.to_str().unwrap(),
    ]);
    let records: Vec<OnlineRecord> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(records.len(), 3);
    for r in &records {
        let inst = generate(4, 20, Disorder::Rademacher, r.seed).unwrap();
        assert_eq!(OnlineAlg::Greedy.solve(&inst, 0).unwrap().signs, r.signs);
    }
}

#[test]
fn instance_file_round_trip_via_binary() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["csv", "f64le"] {
        let path = dir.path().join(format!("inst.{body}"));
        ogp(&["gen", "--rows", "3", "--cols", "11", "--seed", "8", "--body", body, "--out", path.to_str().unwrap()]);
        let out = ogp(&["disc", "--input", path.to_str().unwrap()]);
        let got: DiscrepancyResult = serde_json::from_slice(&out.stdout).unwrap();
        let want = exact_discrepancy(&generate(3, 11, Disorder::Gaussian, 8).unwrap(), 30).unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn experiment_rerun_via_binary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{"task": {"kind": "online", "rows": 3, "cols": 12, "algorithm": {"alg": "potential"}},
            "seeds": {"start": 0, "end": 2}}"#,
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ogp(&["experiment", "--config", cfg_path.to_str().unwrap(), "--seeds", "0..3", "--out", a.to_str().unwrap()]);
    let manifest = Manifest::from_file(&a.join("manifest.json")).unwrap();
    assert_eq!(manifest.tasks.len(), 3);
    let out = ogp(&["experiment", "--rerun", a.join("manifest.json").to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "[]");
    for t in &manifest.tasks {
        assert_eq!(std::fs::read(a.join(&t.file)).unwrap(), std::fs::read(b.join(&t.file)).unwrap());
    }
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_ogp"))
        .args(["theory", "alpha-c", "--kappa", "1"])
        .env("OGP_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("alpha-c.json")).unwrap()).unwrap();
    assert_eq!(v["quantity"], "alpha_c");
}
