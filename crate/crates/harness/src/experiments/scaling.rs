//! Besov norms of `f_n^m` and `g_n^m` against `n`.

use epdiff_core::perturbations::make_translated_pair;
use rayon::prelude::*;

use super::{max_of, Setup};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::PlotSpec;
use crate::report::{log2_slope, ExperimentReport, Table, Verdict};

pub const PLOTS: &[PlotSpec] = &[
    PlotSpec {
        table: "norms",
        x: "n",
        y: "f_norm",
        group: Some("k"),
        log_y: true,
        title: "||f_n^m|| in B^{s+k}",
    },
    PlotSpec {
        table: "norms",
        x: "n",
        y: "g_norm",
        group: Some("k"),
        log_y: true,
        title: "||g_n^m|| in B^{s+k}",
    },
];

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = Setup::new(cfg)?;
    cfg.validate_sweep(&setup.grid)?;
    let ns = cfg.ns();
    if ns.len() < 2 {
        return Err(HarnessError::Config("a slope fit needs at least two values of n".into()));
    }
    if cfg.k_list.is_empty() {
        return Err(HarnessError::Config("k_list must be non-empty".into()));
    }
    let cases: Vec<(u32, f64)> = ns
        .iter()
        .flat_map(|&n| cfg.m_list.iter().map(move |&m| (n, m)))
        .collect();
    // Per case: one (f_norm, g_norm) per k.
    let norms: Vec<Vec<(f64, f64)>> = cases
        .par_iter()
        .map(|&(n, m)| -> Result<Vec<(f64, f64)>> {
            let (f, g) = make_translated_pair(&cfg.perturbation(n, m), &setup.grid)?;
            cfg.k_list
                .iter()
                .map(|&k| Ok((setup.besov_shifted(&f, k)?, setup.besov_shifted(&g, k)?)))
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new("scaling", cfg);
    let mut table = Table::new("norms", &["k", "f_norm", "g_norm"]);
    for (&(n, m), row) in cases.iter().zip(&norms) {
        for (&k, &(fv, gv)) in cfg.k_list.iter().zip(row) {
            table.push(vec![n as f64, m, 0.0, k, fv, gv]);
        }
    }
    let value = |n: u32, m: f64, ki: usize, which: usize| {
        let ci = cases.iter().position(|&c| c == (n, m)).expect("case");
        let (fv, gv) = norms[ci][ki];
        if which == 0 {
            fv
        } else {
            gv
        }
    };
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let tol = &cfg.tolerances;
    let (mut f_dev, mut g_dev, mut f_m, mut g_m) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let m0 = cfg.m_list[0];
    for (ki, &k) in cfg.k_list.iter().enumerate() {
        for &m in &cfg.m_list {
            let fy: Vec<f64> = ns.iter().map(|&n| value(n, m, ki, 0)).collect();
            let gy: Vec<f64> = ns.iter().map(|&n| value(n, m, ki, 1)).collect();
            let fs = log2_slope(&x, &fy);
            let gs = log2_slope(&x, &gy);
            report.fit(format!("f_slope(k={k},m={m})"), fs);
            report.fit(format!("g_slope(k={k},m={m})"), gs);
            f_dev = f_dev.max((fs - k).abs());
            g_dev = g_dev.max((gs + 1.0).abs());
            for &n in &ns {
                f_m = f_m.max((value(n, m, ki, 0) / value(n, m0, ki, 0) - 1.0).abs());
                g_m = g_m.max((value(n, m, ki, 1) / value(n, m0, ki, 1) - 1.0).abs());
            }
        }
        // C in ||f_n^m||_{B^{s+k}} <= C 2^{kn - N}.
        let c = max_of(ns.iter().flat_map(|&n| {
            cfg.m_list
                .iter()
                .map(move |&m| (n, m))
                .map(|(n, m)| value(n, m, ki, 0) / 2f64.powf(k * n as f64 - cfg.n_damp))
        }));
        report.fit(format!("f_constant(k={k})"), c);
    }
    report.verdicts.push(Verdict::at_most(
        "f_slope",
        "log2 ||f_n^m||_{B^{s+k}} grows like k n: max |slope - k| over k and m",
        f_dev,
        tol.f_slope,
    ));
    report.verdicts.push(Verdict::at_most(
        "g_slope",
        "log2 ||g_n^m||_{B^{s+k}} decays like -n: max |slope + 1| over k and m",
        g_dev,
        tol.g_slope,
    ));
    report.verdicts.push(Verdict::at_most(
        "f_translation_invariance",
        "||f_n^m|| does not depend on m: max |norm(m) / norm(m_0) - 1|",
        f_m,
        tol.m_independence,
    ));
    report.verdicts.push(Verdict::at_most(
        "g_translation_invariance",
        "||g_n^m|| does not depend on m: max |norm(m) / norm(m_0) - 1|",
        g_m,
        tol.m_independence,
    ));
    report.tables.push(table);
    Ok(report)
}
