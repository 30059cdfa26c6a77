use std::path::Path;
use std::process::Command;

use epdiff_core::perturbations::BasePreset;
use epdiff_harness::report::Table;
use epdiff_harness::{run, run_to_dir, Experiment, ExperimentConfig, ExperimentReport, HarnessError};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epdiff"))
}

/// A 1024 x 64 grid that resolves packets up to n = 4.
fn small(exp: Experiment) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(exp);
    cfg.points = vec![1024, 64];
    cfg.n_range = vec![3, 4];
    cfg.m_list = vec![0.0, 16.0];
    cfg.solver.t_max = 0.2;
    cfg.solver.snapshot_times = vec![0.1, 0.2];
    cfg.dt_refinement = false;
    cfg.plots = false;
    cfg.threads = 1;
    cfg
}

const SMALL_FLAGS: [&str; 6] = ["--points", "1024,64", "--n-range", "3,4", "--m-list", "0,16"];

#[test]
fn localize_writes_report_tables_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("localize")
        .args(SMALL_FLAGS)
        .args(["--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS block_identity"), "{stdout}");
    for f in ["report.json", "blocks.csv", "rings.csv", "blocks_residual.svg"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let header = std::fs::read_to_string(dir.path().join("blocks.csv")).unwrap();
    assert!(header.starts_with("n,m,t,j,residual\n"));
    let report = ExperimentReport::read(dir.path()).unwrap();
    assert_eq!(report.config.points, vec![1024, 64]);
    assert!(report.passed());
}

#[test]
fn failing_verdict_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("localize")
        .args(SMALL_FLAGS)
        .args(["--tol", "block_identity=-1", "--no-plots", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL block_identity"));
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "n_range = [4]\n[solver]\ndt = 0.01\nrk_order = 4\n").unwrap();
    let out = bin()
        .args(["scaling", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rk_order"));

    let patch: toml::Table = "threds = 2".parse().unwrap();
    assert!(matches!(
        ExperimentConfig::load(Experiment::Localize, None, Some(patch)),
        Err(HarnessError::Config(_))
    ));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, "n_range = [4, 5]\n[besov]\ns = 5.0\np = 2.0\nr = \"inf\"\n").unwrap();
    let out = bin()
        .args(["scaling", "--print-config", "--config", path.to_str().unwrap()])
        .args(["--n-range", "5,6", "--k-list", "-1,2", "--seed", "9"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cfg: ExperimentConfig = toml::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.n_range, vec![5, 6]);
    assert_eq!(cfg.k_list, vec![-1.0, 2.0]);
    assert_eq!(cfg.besov.s, 5.0);
    assert!(cfg.besov.r.is_infinite());
    assert_eq!(cfg.base.seed, 9);
}

#[test]
fn besov_index_outside_theorem_range_needs_diagnostic_flag() {
    let mut cfg = small(Experiment::Localize);
    cfg.besov.s = 3.0;
    assert!(matches!(run(Experiment::Localize, &cfg), Err(HarnessError::Config(_))));
    cfg.diagnostic = true;
    assert!(run(Experiment::Localize, &cfg).unwrap().passed());
}

#[test]
fn unresolved_packet_is_rejected() {
    let mut cfg = small(Experiment::Scaling);
    cfg.n_range = vec![4, 6];
    assert!(run(Experiment::Scaling, &cfg).is_err());
}

#[test]
fn report_round_trips_through_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(Experiment::Scaling);
    cfg.output = dir.path().to_path_buf();
    let (report, files) = run_to_dir(Experiment::Scaling, &cfg).unwrap();
    assert!(files.iter().any(|f| f.ends_with("norms.csv")));
    let back = ExperimentReport::read(dir.path()).unwrap();
    assert_eq!(back, report);
    let table = report.table("norms").unwrap();
    let csv = Table::read_csv(&dir.path().join("norms.csv"), &table.name, &table.columns).unwrap();
    assert_eq!(&csv, table);
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn csv_schema_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let columns: Vec<String> = ["n", "m", "t", "sigma"].iter().map(|s| s.to_string()).collect();
    write(&path, "n,m,t,sigma,extra\n1,0,0,1e-3,5\n");
    let err = Table::read_csv(&path, "t", &columns).unwrap_err();
    assert!(err.to_string().contains("extra"), "{err}");
    write(&path, "n,m,t\n1,0,0\n");
    let err = Table::read_csv(&path, "t", &columns).unwrap_err();
    assert!(err.to_string().contains("sigma"), "{err}");
    write(&path, "n,m,t,sigma\n1,0,0,1e-3\n");
    assert_eq!(Table::read_csv(&path, "t", &columns).unwrap().rows, vec![vec![1.0, 0.0, 0.0, 1e-3]]);
}

#[test]
fn separation_requires_the_zero_datum() {
    let mut cfg = small(Experiment::Separation);
    cfg.base.preset = BasePreset::GaussianVortexlike;
    assert!(matches!(run(Experiment::Separation, &cfg), Err(HarnessError::Config(_))));
}

#[test]
fn nowhere_with_zero_datum_reproduces_separation() {
    let sep_cfg = small(Experiment::Separation);
    let mut now_cfg = small(Experiment::Nowhere);
    now_cfg.base.preset = BasePreset::Zero;
    let sep = run(Experiment::Separation, &sep_cfg).unwrap();
    let now = run(Experiment::Nowhere, &now_cfg).unwrap();

    let s = sep.table("separation").unwrap();
    let e = now.table("errors").unwrap();
    let mut compared = 0;
    for row in &s.rows {
        let other = e
            .rows
            .iter()
            .find(|o| (o[0], o[1], o[2]) == (row[0], row[1], row[2]))
            .unwrap_or_else(|| panic!("no nowhere row for n, m, t = {:?}", &row[..3]));
        let (a, b) = (row[3], other[5]);
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300), "{a} vs {b}");
        compared += 1;
    }
    assert_eq!(compared, s.rows.len());
    assert!(now.passed(), "{}", now.summary());
    // With u0 = 0 the tail error and the defect vanish identically.
    for v in ["tail_error_bound", "defect_decay", "defect_initial"] {
        assert_eq!(now.verdict(v).unwrap().value, 0.0, "{v}");
    }
}

#[test]
fn nowhere_flags_an_insufficient_m_range() {
    let mut cfg = small(Experiment::Nowhere);
    cfg.m_list = vec![8.0];
    cfg.n_range = vec![3];
    cfg.solver.t_max = 0.1;
    cfg.solver.snapshot_times = vec![0.1];
    let report = run(Experiment::Nowhere, &cfg).unwrap();
    let v = report.verdict("defect_decay").unwrap();
    assert!(!v.passed);
    assert!(v.detail.contains("insufficient m-range"));
    assert!(!report.passed());
}

#[test]
fn inequality_suite_is_reproducible_and_needs_ten_cases() {
    let mut cfg = ExperimentConfig::defaults(Experiment::Inequalities);
    cfg.threads = 1;
    let a = run(Experiment::Inequalities, &cfg).unwrap();
    let b = run(Experiment::Inequalities, &cfg).unwrap();
    assert_eq!(a.tables, b.tables);
    assert_eq!(a.fits, b.fits);
    cfg.case_count = 9;
    assert!(run(Experiment::Inequalities, &cfg).is_err());
}

#[test]
fn converge_with_zero_datum_is_exact() {
    let mut cfg = ExperimentConfig::defaults(Experiment::Converge);
    cfg.points = vec![64, 64];
    cfg.base.preset = BasePreset::Zero;
    let report = run(Experiment::Converge, &cfg).unwrap();
    assert!(report.passed(), "{}", report.summary());
    let diffs = report.table("temporal").unwrap().column("difference").unwrap();
    assert!(diffs.iter().all(|&d| d == 0.0));
}
