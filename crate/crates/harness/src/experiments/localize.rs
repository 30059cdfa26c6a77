//! Dyadic localization of the translated packets `f_n^m`.

use epdiff_core::littlewood_paley::dyadic_block;
use epdiff_core::perturbations::{make_translated_pair, ring_leakage};
use rayon::prelude::*;

use super::{max_of, Setup};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::plot::PlotSpec;
use crate::report::{ExperimentReport, Table, Verdict};

pub const PLOTS: &[PlotSpec] = &[PlotSpec {
    table: "blocks",
    x: "j",
    y: "residual",
    group: Some("n"),
    log_y: true,
    title: "relative Besov norm of block residuals",
}];

struct Case {
    n: u32,
    m: f64,
    /// `(j, residual)`: `||Delta_n f - f|| / ||f||` at `j = n`, else `||Delta_j f|| / ||f||`.
    blocks: Vec<(i32, f64)>,
    leak: f64,
    norm: f64,
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = Setup::new(cfg)?;
    cfg.validate_sweep(&setup.grid)?;
    let cases: Vec<(u32, f64)> = cfg
        .ns()
        .into_iter()
        .flat_map(|n| cfg.m_list.iter().map(move |&m| (n, m)))
        .collect();
    let results: Vec<Case> = cases
        .par_iter()
        .map(|&(n, m)| -> Result<Case> {
            let (f, _) = make_translated_pair(&cfg.perturbation(n, m), &setup.grid)?;
            let norm = setup.besov(&f)?;
            let mut blocks = Vec::new();
            for j in -1..=setup.cp.j_max() {
                let b = dyadic_block(&f, j, &setup.cp)?;
                let r = if j == n as i32 {
                    setup.besov(&(&b - &f))?
                } else {
                    setup.besov(&b)?
                };
                blocks.push((j, r / norm));
            }
            Ok(Case {
                n,
                m,
                blocks,
                leak: ring_leakage(&f, n),
                norm,
            })
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new("localize", cfg);
    let mut blocks = Table::new("blocks", &["j", "residual"]);
    let mut rings = Table::new("rings", &["ring_leak", "f_norm"]);
    for c in &results {
        for &(j, r) in &c.blocks {
            blocks.push(vec![c.n as f64, c.m, 0.0, j as f64, r]);
        }
        rings.push(vec![c.n as f64, c.m, 0.0, c.leak, c.norm]);
    }
    let on = max_of(results.iter().flat_map(|c| c.blocks.iter().filter(|b| b.0 == c.n as i32).map(|b| b.1)));
    let off = max_of(results.iter().flat_map(|c| c.blocks.iter().filter(|b| b.0 != c.n as i32).map(|b| b.1)));
    let leak = max_of(results.iter().map(|c| c.leak));
    let tol = &cfg.tolerances;
    report.verdicts.push(Verdict::at_most(
        "block_identity",
        "the block at the packet's own scale reproduces it: ||Delta_n f_n^m - f_n^m|| / ||f_n^m|| is at roundoff",
        on,
        tol.block_identity,
    ));
    report.verdicts.push(Verdict::at_most(
        "off_blocks_vanish",
        "every other block of f_n^m vanishes: max_{j != n} ||Delta_j f_n^m|| / ||f_n^m||",
        off,
        tol.block_leak,
    ));
    report.verdicts.push(Verdict::at_most(
        "ring_containment",
        "the spectrum of f_n^m lies inside 4/3 2^n <= |xi| <= 3/2 2^n (leaked energy fraction)",
        leak,
        tol.ring_leak,
    ));
    report.fit("max_on_block_residual", on);
    report.fit("max_off_block_residual", off);
    report.tables.push(blocks);
    report.tables.push(rings);
    Ok(report)
}
