//! Separation of the solutions issued from `f_n^m + g_n^m` and `f_n^m`.
//!
//! With `sigma_n(t) = ||S_t(f + g) - S_t(f)||_{B^s}` the distance starts at
//! `||g_n||`, which vanishes as `n` grows, while for `t > 0` it stays above a
//! line `c_0 t` uniformly in `n`.

use epdiff_core::dynamics::{lipschitz_horizon, solve, SolverConfig};
use epdiff_core::perturbations::{make_base_datum, make_translated_pair, BasePreset};
use epdiff_core::spectral::Field;
use rayon::prelude::*;

use super::{min_of, perturbed, Setup};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::PlotSpec;
use crate::report::{log2_slope, ExperimentReport, Table, Verdict};

pub const PLOTS: &[PlotSpec] = &[PlotSpec {
    table: "separation",
    x: "t",
    y: "sigma",
    group: Some("n"),
    log_y: false,
    title: "||S_t(f+g) - S_t(f)|| in B^s",
}];

/// `sigma(t)` for one `(n, m)`.
#[derive(Debug, Clone)]
pub struct PairRun {
    pub n: u32,
    pub m: f64,
    pub times: Vec<f64>,
    pub sigma: Vec<f64>,
    pub g_norm: f64,
    pub horizon: f64,
}

/// Integrates `u0 + f + g` and `u0 + f` and measures their distance.
pub fn pair_run(setup: &Setup, cfg: &ExperimentConfig, u0: &Field, n: u32, m: f64, solver: &SolverConfig) -> Result<PairRun> {
    let (f, g) = make_translated_pair(&cfg.perturbation(n, m), &setup.grid)?;
    let a0 = perturbed(u0, &f, Some(&g));
    let b0 = perturbed(u0, &f, None);
    let horizon = lipschitz_horizon(&a0)?;
    let ta = solve(&a0, solver)?;
    let tb = solve(&b0, solver)?;
    let sigma = ta
        .states
        .iter()
        .zip(&tb.states)
        .map(|(a, b)| setup.besov(&(a - b)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(PairRun {
        n,
        m,
        times: ta.times.clone(),
        sigma,
        g_norm: setup.besov(&g)?,
        horizon,
    })
}

/// `T_0 = min(0.5, t_max, horizon / 4)`.
pub fn window_end(cfg: &ExperimentConfig, horizon: f64) -> f64 {
    0.5f64.min(cfg.solver.t_max).min(horizon / 4.0)
}

/// Output times inside `[window_start, t0]`.
pub fn window(times: &[f64], start: f64, t0: f64) -> Vec<usize> {
    (0..times.len())
        .filter(|&i| times[i] > 0.0 && times[i] >= start - 1e-12 && times[i] <= t0 + 1e-12)
        .collect()
}

/// The two largest values of `n`.
pub fn top_two(ns: &[u32]) -> Vec<u32> {
    let mut v = ns.to_vec();
    v.sort_unstable();
    v.into_iter().rev().take(2).collect()
}

/// `min sigma_n(t) / t` over the two largest `n`, every run and the window.
pub fn fit_c0(runs: &[PairRun], ns: &[u32], start: f64, t0: f64) -> f64 {
    let top = top_two(ns);
    min_of(runs.iter().filter(|r| top.contains(&r.n)).flat_map(|r| {
        window(&r.times, start, t0)
            .into_iter()
            .map(move |i| r.sigma[i] / r.times[i])
    }))
}

fn sweep(setup: &Setup, cfg: &ExperimentConfig, u0: &Field, ns: &[u32], solver: &SolverConfig) -> Result<Vec<PairRun>> {
    let cases: Vec<(u32, f64)> = ns
        .iter()
        .flat_map(|&n| cfg.m_list.iter().map(move |&m| (n, m)))
        .collect();
    cases
        .par_iter()
        .map(|&(n, m)| pair_run(setup, cfg, u0, n, m, solver))
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = Setup::new(cfg)?;
    cfg.validate_sweep(&setup.grid)?;
    if cfg.base.preset != BasePreset::Zero {
        return Err(HarnessError::Config(format!(
            "separation runs from the zero datum, got preset {}; use nowhere for nonzero data",
            cfg.base.preset
        )));
    }
    let ns = cfg.ns();
    if ns.len() < 2 {
        return Err(HarnessError::Config("separation needs at least two values of n".into()));
    }
    let u0 = make_base_datum(cfg.base.preset, cfg.base.amplitude, &setup.idx, &setup.cp, cfg.base.seed)?;
    let runs = sweep(&setup, cfg, &u0, &ns, &cfg.solver)?;
    let mut report = ExperimentReport::new("separation", cfg);
    let tol = &cfg.tolerances;

    let mut table = Table::new("separation", &["sigma", "g_norm"]);
    for r in &runs {
        for (t, s) in r.times.iter().zip(&r.sigma) {
            table.push(vec![r.n as f64, r.m, *t, *s, r.g_norm]);
        }
    }
    report.tables.push(table);

    let horizon = min_of(runs.iter().map(|r| r.horizon));
    let t0 = window_end(cfg, horizon);
    report.fit("horizon", horizon);
    report.fit("T0", t0);
    let win = window(&runs[0].times, cfg.window_start, t0);
    if win.is_empty() {
        report.verdicts.push(Verdict::new(
            "window",
            "the fit window [window_start, T0] contains output times",
            false,
            0.0,
            1.0,
            format!("no snapshot in [{}, {t0}]", cfg.window_start),
        ));
        return Ok(report);
    }

    let initial = runs
        .iter()
        .map(|r| (r.sigma[0] - r.g_norm).abs() / r.g_norm)
        .fold(0.0f64, f64::max);
    report.verdicts.push(Verdict::at_most(
        "initial_distance",
        "at t = 0 the distance equals ||g_n^m||_{B^s} exactly",
        initial,
        0.0,
    ));

    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut slope_dev = 0.0f64;
    for &m in &cfg.m_list {
        let y: Vec<f64> = ns
            .iter()
            .map(|&n| runs.iter().find(|r| r.n == n && r.m == m).expect("case").sigma[0])
            .collect();
        let s = log2_slope(&x, &y);
        report.fit(format!("initial_slope(m={m})"), s);
        slope_dev = slope_dev.max((s + 1.0).abs());
    }
    report.verdicts.push(Verdict::at_most(
        "initial_slope",
        "initial distances vanish like 2^{-n}: max |log2 slope + 1|",
        slope_dev,
        tol.initial_slope,
    ));

    let c0 = fit_c0(&runs, &ns, cfg.window_start, t0);
    report.fit("c0", c0);
    report.verdicts.push(Verdict::at_least(
        "lower_bound",
        "sigma_n(t) >= c0 t on the window for the two largest n, with c0 > 0",
        c0,
        f64::MIN_POSITIVE,
    ));

    // Per-n slope c_n = min sigma_n(t) / t; persistence compares the extremes.
    let slope_of = |n: u32| {
        min_of(runs.iter().filter(|r| r.n == n).flat_map(|r| {
            win.iter().map(move |&i| r.sigma[i] / r.times[i])
        }))
    };
    for &n in &ns {
        report.fit(format!("c(n={n})"), slope_of(n));
    }
    let persistence = slope_of(*ns.last().expect("non-empty")) / slope_of(ns[0]);
    report.fit("persistence", persistence);
    report.verdicts.push(Verdict::at_least(
        "persistence",
        "the linear lower bound does not vanish as n grows: c_{n_max} / c_{n_min} with c_n = min over the window of sigma_n(t) / t",
        persistence,
        tol.persistence,
    ));

    if cfg.dt_refinement {
        let mut half = cfg.solver.clone();
        half.dt *= 0.5;
        let top = top_two(&ns);
        let reruns = sweep(&setup, cfg, &u0, &top, &half)?;
        let c0_half = fit_c0(&reruns, &ns, cfg.window_start, t0);
        report.fit("c0_half_dt", c0_half);
        report.verdicts.push(Verdict::at_most(
            "c0_dt_stability",
            "the fitted c0 is insensitive to halving the time step: |c0(dt/2) / c0(dt) - 1|",
            (c0_half / c0 - 1.0).abs(),
            tol.c0_dt_change,
        ));
    } else {
        report.notes.push("time-step refinement of c0 skipped".into());
    }
    Ok(report)
}
