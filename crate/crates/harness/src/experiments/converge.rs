//! Solver trust gate: temporal order, energy conservation and spatial
//! resolution independence on a smooth datum.

use epdiff_core::dynamics::{solve, SolverConfig, Trajectory};
use epdiff_core::littlewood_paley::build_chi_phi;
use epdiff_core::perturbations::make_base_datum;
use epdiff_core::spectral::{resample, Field};
use rayon::prelude::*;

use super::{max_of, Setup};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::PlotSpec;
use crate::report::{ExperimentReport, Table, Verdict};

pub const PLOTS: &[PlotSpec] = &[PlotSpec {
    table: "temporal",
    x: "t",
    y: "difference",
    group: Some("n"),
    log_y: true,
    title: "sup-norm difference between successive time steps",
}];

/// Time steps `dt, dt/2, dt/4`.
pub const LEVELS: usize = 3;

fn diff_sup(a: &Field, b: &Field) -> f64 {
    (a - b).max_abs()
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.refinement < 2 {
        return Err(HarnessError::Config("refinement must be at least 2".into()));
    }
    let setup = Setup::new(cfg)?;
    cfg.solver.validate()?;
    let u0 = make_base_datum(cfg.base.preset, cfg.base.amplitude, &setup.idx, &setup.cp, cfg.base.seed)?;
    let solvers: Vec<SolverConfig> = (0..LEVELS)
        .map(|l| {
            let mut s = cfg.solver.clone();
            s.dt /= (1u32 << l) as f64;
            s
        })
        .collect();
    let fine_grid = setup.grid.refined(cfg.refinement)?;
    let fine_cp = build_chi_phi(&fine_grid)?;
    let fine_u0 = resample(&u0, fine_cp.grid())?;

    // Index LEVELS is the refined-grid run at the smallest step.
    let runs: Vec<Trajectory> = (0..=LEVELS)
        .into_par_iter()
        .map(|l| {
            if l < LEVELS {
                solve(&u0, &solvers[l])
            } else {
                solve(&fine_u0, &solvers[LEVELS - 1])
            }
        })
        .collect::<std::result::Result<_, _>>()?;
    let times = runs[0].times.clone();
    let scale = max_of(runs[LEVELS - 1].states.iter().map(Field::max_abs));

    let mut report = ExperimentReport::new("converge", cfg);
    let tol = &cfg.tolerances;
    report.fit("sup_norm", scale);
    let mut temporal = Table::new("temporal", &["dt", "difference", "energy"]);
    let mut errs = Vec::new();
    for l in 0..LEVELS {
        let mut worst = 0.0f64;
        for (i, &t) in times.iter().enumerate() {
            let d = if l + 1 < LEVELS {
                diff_sup(&runs[l].states[i], &runs[l + 1].states[i])
            } else {
                0.0
            };
            worst = worst.max(d);
            temporal.push(vec![l as f64, 0.0, t, solvers[l].dt, d, runs[l].energy[i]]);
        }
        if l + 1 < LEVELS {
            errs.push(worst);
            report.fit(format!("difference(dt={})", solvers[l].dt), worst);
        }
    }

    let mut spatial = Table::new("spatial", &["change"]);
    let mut change = 0.0f64;
    for (i, &t) in times.iter().enumerate() {
        let back = resample(&runs[LEVELS].states[i], &setup.grid)?;
        let c = diff_sup(&back, &runs[LEVELS - 1].states[i]);
        change = change.max(c);
        spatial.push(vec![0.0, cfg.refinement as f64, t, c]);
    }
    report.tables.push(temporal);
    report.tables.push(spatial);

    if scale == 0.0 {
        report.notes.push("zero datum: every difference vanishes".into());
        report.verdicts.push(Verdict::at_most(
            "temporal_order",
            "with a zero datum the solution stays zero at every time step",
            max_of(errs.iter().copied()),
            0.0,
        ));
    } else {
        let order = (errs[0] / errs[1]).log2();
        report.fit("order", order);
        report.verdicts.push(Verdict::at_least(
            "temporal_order",
            "halving the time step shrinks the self-convergence error at fourth order: observed log2 ratio",
            order,
            tol.convergence_order,
        ));
    }
    let drift = runs[LEVELS - 1].energy_drift();
    report.fit("energy_drift", drift);
    report.verdicts.push(Verdict::at_most(
        "energy_drift",
        "the H^1 energy is conserved: max relative deviation from its initial value",
        drift,
        tol.energy_drift,
    ));
    let rel = if scale > 0.0 { change / scale } else { change };
    report.fit("resolution_change", rel);
    report.verdicts.push(Verdict::at_most(
        "resolution_change",
        "refining the grid leaves the solution unchanged: sup-norm change relative to the solution size",
        rel,
        tol.resolution_change,
    ));
    Ok(report)
}
