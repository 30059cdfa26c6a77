//! Numerical constants of the operator, product, interpolation and Bernstein
//! inequalities on seeded random smooth fields.
//!
//! Every case is evaluated on the configured grid and again after the fields
//! are resampled onto a grid refined by `cfg.refinement`. The fitted constant
//! of an inequality is the largest ratio over the cases (smallest for the
//! lower Bernstein bound); it must be finite and change by less than a factor
//! `refinement_spread` between the two levels.

use epdiff_core::dynamics::{gradient_lp, t_op, value_gradient_sup, w_norm};
use epdiff_core::littlewood_paley::{
    besov_norm, build_chi_phi, check_bernstein, check_interpolation, check_product, check_product_shifted, dyadic_block,
    interpolation_endpoint_constant, low_freq_truncate, BesovIndex, ChiPhi, Localization,
};
use epdiff_core::spectral::{lp_norm, random_band_limited, resample, Field, Grid};
use rayon::prelude::*;

use super::{max_of, min_of, Setup};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::PlotSpec;
use crate::report::{ExperimentReport, Table, Verdict};

pub const PLOTS: &[PlotSpec] = &[PlotSpec {
    table: "ratios",
    x: "n",
    y: "t_besov",
    group: Some("m"),
    log_y: false,
    title: "||T(f,g)||_{B^s} / (||f|| ||g||) per case and level",
}];

/// Spectral radius of the random test fields.
pub const FIELD_BAND: f64 = 2.5;
pub const MIN_CASES: usize = 10;

/// Ratio columns, in table order.
pub const COLUMNS: [&str; 12] = [
    "t_besov",
    "t_lp_grad",
    "t_lp_w1",
    "grad_t_grad",
    "grad_t_w2",
    "product",
    "product_shifted",
    "interpolation",
    "interpolation_endpoint",
    "bernstein_ball",
    "bernstein_annulus",
    "zero_lhs",
];

/// Columns whose fitted constant is a lower bound.
const LOWER: [&str; 1] = ["bernstein_annulus"];

fn normalized(grid: &Grid, components: usize, seed: u64) -> Field {
    let f = random_band_limited(grid, components, FIELD_BAND, seed);
    let top = f.max_abs();
    f.scaled(1.0 / top)
}

/// All ratios for one pair of fields. `zero_lhs` collects the left-hand
/// sides with `f = 0`.
fn ratios(f: &Field, g: &Field, idx: &BesovIndex, cp: &ChiPhi) -> Result<Vec<f64>> {
    let besov = |h: &Field| -> Result<f64> { Ok(besov_norm(h, idx, cp)?.value) };
    let p = idx.p;
    let t = t_op(f, g)?;
    let t_lp = lp_norm(&t, p)?;
    let grad_t = gradient_lp(&t, p)?;
    let grad_f = gradient_lp(f, p)?;
    let g_sup = value_gradient_sup(g)?;
    let fs = f.component(0);
    let gs = g.component(0);
    let product = check_product(&fs, &gs, idx, cp)?.ratio;
    let shifted = check_product_shifted(&fs, &gs, idx, cp)?.ratio;
    let interp = check_interpolation(&fs, idx.s - 1.0, idx.s + 1.0, 0.5, p, idx.r, cp)?.ratio;
    let endpoint = interpolation_endpoint_constant(&fs, idx.s - 1.0, idx.s + 1.0, 0.5, p, cp)?;
    let ball = check_bernstein(&low_freq_truncate(&fs, 1, cp)?, Localization::Ball, 2.0, 1, 2.0, f64::INFINITY)?.ratio;
    let annulus = check_bernstein(&dyadic_block(&fs, 1, cp)?, Localization::Annulus, 2.0, 1, p, p)?.ratio;

    let zero = Field::zeros(f.grid(), f.n_components());
    let tz = t_op(&zero, g)?;
    let zero_lhs = [
        besov(&tz)?,
        lp_norm(&tz, p)?,
        gradient_lp(&tz, p)?,
        check_product(&zero.component(0), &gs, idx, cp)?.lhs,
        check_interpolation(&zero.component(0), idx.s - 1.0, idx.s + 1.0, 0.5, p, idx.r, cp)?.lhs,
    ]
    .into_iter()
    .fold(0.0f64, f64::max);

    Ok(vec![
        besov(&t)? / (besov(f)? * besov(g)?),
        t_lp / (grad_f * g_sup),
        t_lp / w_norm(f, g, 1, p)?,
        grad_t / (grad_f * g_sup),
        grad_t / w_norm(f, g, 2, p)?,
        product,
        shifted,
        interp,
        endpoint,
        ball,
        annulus,
        zero_lhs,
    ])
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.case_count < MIN_CASES {
        return Err(HarnessError::Config(format!(
            "case_count = {} but the suites need at least {MIN_CASES} cases",
            cfg.case_count
        )));
    }
    if cfg.refinement < 2 {
        return Err(HarnessError::Config("refinement must be at least 2".into()));
    }
    let setup = Setup::new(cfg)?;
    let fine = setup.grid.refined(cfg.refinement)?;
    let fine_cp = build_chi_phi(&fine)?;
    let d = setup.grid.dim();
    let seeds: Vec<(u64, u64)> = (0..cfg.case_count as u64)
        .map(|i| {
            let s = cfg.base.seed.wrapping_mul(1_000_003).wrapping_add(2 * i);
            (s, s + 1)
        })
        .collect();
    let rows: Vec<(Vec<f64>, Vec<f64>)> = seeds
        .par_iter()
        .map(|&(sf, sg)| -> Result<(Vec<f64>, Vec<f64>)> {
            let f = normalized(&setup.grid, d, sf);
            let g = normalized(&setup.grid, d, sg);
            let coarse = ratios(&f, &g, &setup.idx, &setup.cp)?;
            let refined = ratios(&resample(&f, &fine)?, &resample(&g, &fine)?, &setup.idx, &fine_cp)?;
            Ok((coarse, refined))
        })
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new("inequalities", cfg);
    let tol = &cfg.tolerances;
    let mut table = Table::new("ratios", &COLUMNS);
    for (i, (c, r)) in rows.iter().enumerate() {
        for (level, vals) in [c, r].into_iter().enumerate() {
            let mut row = vec![i as f64, level as f64, 0.0];
            row.extend(vals);
            table.push(row);
        }
    }

    let mut finite = true;
    let mut spread = 1.0f64;
    let mut worst = String::new();
    for (ci, &name) in COLUMNS.iter().enumerate() {
        if name == "zero_lhs" {
            continue;
        }
        let fit = |level: usize| {
            let vals = rows.iter().map(|(c, r)| if level == 0 { c[ci] } else { r[ci] });
            if LOWER.contains(&name) {
                min_of(vals)
            } else {
                max_of(vals)
            }
        };
        let (a, b) = (fit(0), fit(1));
        report.fit(format!("{name}(level=0)"), a);
        report.fit(format!("{name}(level=1)"), b);
        finite &= a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0;
        let s = (a / b).max(b / a);
        if s > spread || s.is_nan() {
            spread = if s.is_nan() { f64::INFINITY } else { s };
            worst = name.to_string();
        }
    }
    report.verdicts.push(Verdict::new(
        "constants_finite",
        "every fitted constant is finite and positive",
        finite,
        if finite { 1.0 } else { 0.0 },
        1.0,
        format!("{} constants", COLUMNS.len() - 1),
    ));
    let v = Verdict::at_most(
        "refinement_stability",
        "each fitted constant changes by at most the given factor under grid refinement",
        spread,
        tol.refinement_spread,
    );
    let detail = format!("{}; worst {}", v.detail, if worst.is_empty() { "none" } else { &worst });
    report.verdicts.push(v.with_detail(detail));

    let ci = COLUMNS.iter().position(|&c| c == "interpolation").expect("column");
    let interp = max_of(rows.iter().flat_map(|(c, r)| [c[ci], r[ci]]));
    report.verdicts.push(Verdict::at_most(
        "interpolation",
        "the constant-one interpolation inequality holds: max ratio minus one",
        interp - 1.0,
        tol.interpolation,
    ));
    let zi = COLUMNS.len() - 1;
    let zero = max_of(rows.iter().flat_map(|(c, r)| [c[zi], r[zi]]));
    report.verdicts.push(Verdict::at_most(
        "zero_field",
        "with f = 0 every left-hand side vanishes",
        zero,
        0.0,
    ));
    report.tables.push(table);
    Ok(report)
}
