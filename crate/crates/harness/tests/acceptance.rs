//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N ...: PASS|FAIL` line. Run with `--nocapture` to see them.
//!
//! Criteria 6 and 7 integrate dozens of trajectories on the default
//! 4096 x 64 grid and take several minutes each.

use epdiff_core::dynamics::{ch_p_op, t_op};
use epdiff_core::spectral::{random_band_limited, Field, Grid};
use epdiff_harness::config::Tolerances;
use epdiff_harness::{run, Experiment, ExperimentConfig, ExperimentReport};

fn line(n: u32, name: &str, passed: bool, detail: &str) {
    println!("criterion {n} {name}: {} ({detail})", if passed { "PASS" } else { "FAIL" });
}

/// Acceptance thresholds, set explicitly rather than inherited.
fn tolerances() -> Tolerances {
    Tolerances {
        block_identity: 1e-10,
        block_leak: 1e-12,
        ring_leak: 1e-12,
        f_slope: 0.1,
        g_slope: 0.05,
        m_independence: 1e-6,
        initial_slope: 0.05,
        c0_dt_change: 0.05,
        error_constant_spread: 2.0,
        m_decay_factor: 3.0,
        separation_fraction: 0.5,
        refinement_spread: 2.0,
        interpolation: 1e-10,
        convergence_order: 3.7,
        energy_drift: 1e-6,
        ..Tolerances::default()
    }
}

fn config(exp: Experiment) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(exp);
    cfg.tolerances = tolerances();
    cfg.plots = false;
    cfg
}

/// Checks that every named verdict exists and passed; prints the line.
fn judge(n: u32, name: &str, report: &ExperimentReport, verdicts: &[&str]) {
    let mut parts = Vec::new();
    let mut passed = true;
    for v in verdicts {
        match report.verdict(v) {
            Some(v) => {
                passed &= v.passed;
                parts.push(format!("{} {}", v.name, v.detail));
            }
            None => {
                passed = false;
                parts.push(format!("{v} missing"));
            }
        }
    }
    line(n, name, passed, &parts.join("; "));
    assert!(passed, "{}", report.summary());
}

#[test]
fn criterion_1_dyadic_localization() {
    let cfg = config(Experiment::Localize);
    let report = run(Experiment::Localize, &cfg).unwrap();
    judge(1, "dyadic localization", &report, &["block_identity", "off_blocks_vanish"]);
}

#[test]
fn criterion_2_norm_scaling() {
    let cfg = config(Experiment::Scaling);
    assert_eq!(cfg.k_list, vec![-1.0, 0.0, 1.0]);
    let report = run(Experiment::Scaling, &cfg).unwrap();
    judge(
        2,
        "norm scaling",
        &report,
        &["f_slope", "g_slope", "f_translation_invariance", "g_translation_invariance"],
    );
}

fn grid_1d() -> Grid {
    Grid::new(&[256], &[40.0]).unwrap()
}

#[test]
fn criterion_3_one_dimensional_oracle() {
    let grid = grid_1d();
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let u = random_band_limited(&grid, 1, 4.0, 1000 + seed);
        let t = t_op(&u, &u).unwrap();
        let p = ch_p_op(&u, &u).unwrap();
        worst = worst.max(t.max_coeff_diff(&p) / p.max_abs_coeff());
    }
    let passed = worst < 1e-10;
    line(3, "one-dimensional oracle", passed, &format!("max relative error {worst:.3e} < 1e-10"));
    assert!(passed);
}

fn relative(a: &Field, b: &Field) -> f64 {
    a.max_coeff_diff(b) / a.max_abs_coeff().max(b.max_abs_coeff())
}

#[test]
fn criterion_4_symmetry_and_bilinearity() {
    let grid = Grid::new(&[64, 64], &[32.0, 32.0]).unwrap();
    let (mut swap, mut scale) = (0.0f64, 0.0f64);
    for seed in 0..20u64 {
        let u = random_band_limited(&grid, 2, 4.0, 2 * seed);
        let v = random_band_limited(&grid, 2, 4.0, 2 * seed + 1);
        let w = random_band_limited(&grid, 2, 4.0, 500 + seed);
        let uv = t_op(&u, &v).unwrap();
        swap = swap.max(relative(&uv, &t_op(&v, &u).unwrap()));
        let a = 1.0 + seed as f64 * 0.37;
        scale = scale.max(relative(&t_op(&u.scaled(a), &v).unwrap(), &uv.scaled(a)));
        let sum = t_op(&(&u + &w), &v).unwrap();
        scale = scale.max(relative(&sum, &(&uv + &t_op(&w, &v).unwrap())));
    }
    let passed = swap < 1e-14 && scale < 1e-12;
    line(
        4,
        "symmetry and bilinearity",
        passed,
        &format!("swap residual {swap:.3e} < 1e-14, linearity residual {scale:.3e} < 1e-12"),
    );
    assert!(passed);
}

#[test]
fn criterion_5_solver_trust_gate() {
    let cfg = config(Experiment::Converge);
    let report = run(Experiment::Converge, &cfg).unwrap();
    judge(5, "solver trust gate", &report, &["temporal_order", "energy_drift"]);
}

#[test]
fn criterion_6_separation() {
    let cfg = config(Experiment::Separation);
    let report = run(Experiment::Separation, &cfg).unwrap();
    judge(
        6,
        "separation",
        &report,
        &["initial_distance", "initial_slope", "lower_bound", "c0_dt_stability"],
    );
}

#[test]
fn criterion_7_nowhere_uniformity() {
    let cfg = config(Experiment::Nowhere);
    assert_eq!(cfg.m_list, vec![0.0, 4.0, 8.0, 16.0]);
    let report = run(Experiment::Nowhere, &cfg).unwrap();
    judge(
        7,
        "nowhere uniformity",
        &report,
        &["tail_error_bound", "defect_decay", "separation_lower_bound"],
    );
}

#[test]
fn criterion_8_inequality_suites() {
    let cfg = config(Experiment::Inequalities);
    let report = run(Experiment::Inequalities, &cfg).unwrap();
    judge(
        8,
        "inequality suites",
        &report,
        &["constants_finite", "refinement_stability", "interpolation"],
    );
}
