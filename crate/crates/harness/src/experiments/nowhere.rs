//! The three-part splitting of the separation around a nonzero datum `u0`.
//!
//! For each `(n, m)` the harness integrates
//!
//! | name | initial datum |
//! |------|---------------|
//! | `A`  | `u0 + f + g` |
//! | `B`  | `S_n u0 + f + g` |
//! | `C`  | `u0 + f` |
//! | `D`  | `S_n u0 + f` |
//! | `F`  | `f` |
//!
//! and, once per `n`, `E = S_t(S_n u0)`. At the largest `m` it also runs the
//! reference pair `G = S_t(f + g)` against `F`. From these:
//!
//! * the tail error `(A - B) - (C - D)`, bounded by a constant times
//!   `||(I - S_n) u0||`;
//! * the superposition defect `w = D - E - F`, which shrinks as the packet
//!   moves away from `S_n u0`;
//! * the end-to-end separation `A - C`, compared against the reference
//!   slope `c0` fitted from `G - F`.

use epdiff_core::dynamics::{solve, Trajectory};
use epdiff_core::littlewood_paley::{high_freq_tail, low_freq_truncate};
use epdiff_core::perturbations::{make_base_datum, make_translated_pair};
use epdiff_core::spectral::Field;
use rayon::prelude::*;

use super::separation::{top_two, window, window_end};
use super::{max_of, min_of, perturbed, Setup};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::plot::PlotSpec;
use crate::report::{ExperimentReport, Table, Verdict};

pub const PLOTS: &[PlotSpec] = &[
    PlotSpec {
        table: "errors",
        x: "t",
        y: "tail_error",
        group: Some("n"),
        log_y: true,
        title: "tail error in B^s",
    },
    PlotSpec {
        table: "errors",
        x: "m",
        y: "defect",
        group: Some("n"),
        log_y: true,
        title: "superposition defect in B^s",
    },
    PlotSpec {
        table: "errors",
        x: "t",
        y: "separation",
        group: Some("n"),
        log_y: false,
        title: "||S_t(u0+f+g) - S_t(u0+f)|| in B^s",
    },
];

struct Case {
    n: u32,
    m: f64,
    times: Vec<f64>,
    tail_error: Vec<f64>,
    defect: Vec<f64>,
    separation: Vec<f64>,
    /// `||G - F||` at each time, largest `m` only.
    reference: Option<Vec<f64>>,
    horizon: f64,
}

struct Level {
    n: u32,
    tail: f64,
    low: Field,
    e: Trajectory,
}

fn norms(setup: &Setup, states: &[Field]) -> Result<Vec<f64>> {
    states.iter().map(|s| setup.besov(s)).collect()
}

fn run_case(setup: &Setup, cfg: &ExperimentConfig, u0: &Field, level: &Level, m: f64, reference: bool) -> Result<Case> {
    let n = level.n;
    let (f, g) = make_translated_pair(&cfg.perturbation(n, m), &setup.grid)?;
    let a0 = perturbed(u0, &f, Some(&g));
    let horizon = epdiff_core::dynamics::lipschitz_horizon(&a0)?;
    let a = solve(&a0, &cfg.solver)?;
    let b = solve(&perturbed(&level.low, &f, Some(&g)), &cfg.solver)?;
    let c = solve(&perturbed(u0, &f, None), &cfg.solver)?;
    let d = solve(&perturbed(&level.low, &f, None), &cfg.solver)?;
    let ff = solve(&f, &cfg.solver)?;
    let k = a.states.len();
    let tail: Vec<Field> = (0..k)
        .map(|i| &(&a.states[i] - &b.states[i]) - &(&c.states[i] - &d.states[i]))
        .collect();
    let defect: Vec<Field> = (0..k)
        .map(|i| &(&d.states[i] - &level.e.states[i]) - &ff.states[i])
        .collect();
    let sep: Vec<Field> = (0..k).map(|i| &a.states[i] - &c.states[i]).collect();
    let reference = if reference {
        let gg = solve(&perturbed(&Field::zeros(&setup.grid, f.n_components()), &f, Some(&g)), &cfg.solver)?;
        let diff: Vec<Field> = (0..k).map(|i| &gg.states[i] - &ff.states[i]).collect();
        Some(norms(setup, &diff)?)
    } else {
        None
    };
    Ok(Case {
        n,
        m,
        times: a.times.clone(),
        tail_error: norms(setup, &tail)?,
        defect: norms(setup, &defect)?,
        separation: norms(setup, &sep)?,
        reference,
        horizon,
    })
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let setup = Setup::new(cfg)?;
    cfg.validate_sweep(&setup.grid)?;
    let ns = cfg.ns();
    let u0 = make_base_datum(cfg.base.preset, cfg.base.amplitude, &setup.idx, &setup.cp, cfg.base.seed)?;
    let mut ms = cfg.m_list.clone();
    ms.sort_by(|a, b| a.partial_cmp(b).expect("finite m"));
    ms.dedup();
    let m_max = *ms.last().ok_or_else(|| HarnessError::Config("m_list must be non-empty".into()))?;

    let levels: Vec<Level> = ns
        .par_iter()
        .map(|&n| -> Result<Level> {
            let low = low_freq_truncate(&u0, n as i32, &setup.cp)?;
            Ok(Level {
                n,
                tail: setup.besov(&high_freq_tail(&u0, n as i32, &setup.cp)?)?,
                e: solve(&low, &cfg.solver)?,
                low,
            })
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, f64)> = (0..levels.len())
        .flat_map(|li| ms.iter().map(move |&m| (li, m)))
        .collect();
    let cases: Vec<Case> = jobs
        .par_iter()
        .map(|&(li, m)| run_case(&setup, cfg, &u0, &levels[li], m, m == m_max))
        .collect::<Result<_>>()?;

    let mut report = ExperimentReport::new("nowhere", cfg);
    let tol = &cfg.tolerances;
    let zero_datum = u0.max_abs() == 0.0;
    if zero_datum {
        report
            .notes
            .push("u0 = 0: the tail error and its constant vanish identically".into());
    }

    let mut tails = Table::new("tail", &["tail_norm", "error_sup", "error_constant"]);
    let mut errors = Table::new("errors", &["tail_error", "defect", "separation"]);
    let mut reference = Table::new("reference", &["sigma"]);
    let mut constants = Vec::new();
    for lv in &levels {
        let sup = max_of(
            cases
                .iter()
                .filter(|c| c.n == lv.n)
                .flat_map(|c| c.tail_error.iter().copied()),
        );
        let constant = if lv.tail > 0.0 { sup / lv.tail } else { 0.0 };
        if lv.tail > 0.0 {
            constants.push(constant);
        }
        report.fit(format!("error_constant(n={})", lv.n), constant);
        report.fit(format!("tail_norm(n={})", lv.n), lv.tail);
        tails.push(vec![lv.n as f64, 0.0, 0.0, lv.tail, sup, constant]);
    }
    for c in &cases {
        for i in 0..c.times.len() {
            errors.push(vec![c.n as f64, c.m, c.times[i], c.tail_error[i], c.defect[i], c.separation[i]]);
        }
        if let Some(r) = &c.reference {
            for (t, v) in c.times.iter().zip(r) {
                reference.push(vec![c.n as f64, c.m, *t, *v]);
            }
        }
    }
    report.tables.push(tails);
    report.tables.push(errors);
    report.tables.push(reference);

    // Tail error against ||(I - S_n) u0||.
    let error_c = max_of(constants.iter().copied());
    let spread = if constants.is_empty() {
        1.0
    } else {
        error_c / min_of(constants.iter().copied())
    };
    report.fit("error_constant", if constants.is_empty() { 0.0 } else { error_c });
    let mut v = Verdict::at_most(
        "tail_error_bound",
        "sup over m and t of the tail error is a fixed multiple of ||(I - S_n) u0||: spread of the fitted constant over n",
        spread,
        tol.error_constant_spread,
    );
    if zero_datum {
        let sup = max_of(cases.iter().flat_map(|c| c.tail_error.iter().copied()));
        v = Verdict::at_most(
            "tail_error_bound",
            "with u0 = 0 the tail error vanishes identically",
            sup,
            0.0,
        );
    }
    report.verdicts.push(v);

    // Superposition defect along the m-sweep.
    let w0 = max_of(cases.iter().map(|c| c.defect[0]));
    report.verdicts.push(Verdict::at_most(
        "defect_initial",
        "the superposition defect vanishes at t = 0",
        w0,
        0.0,
    ));
    if ms.len() < 2 {
        report.verdicts.push(Verdict::new(
            "defect_decay",
            "the superposition defect decays along the m-sweep",
            false,
            0.0,
            tol.m_decay_factor,
            format!("insufficient m-range: {} distinct value(s)", ms.len()),
        ));
    } else {
        let mut worst = f64::INFINITY;
        let mut envelope_ok = true;
        let mut strict = true;
        for &n in &ns {
            let sups: Vec<f64> = ms
                .iter()
                .map(|&m| {
                    let c = cases.iter().find(|c| c.n == n && c.m == m).expect("case");
                    max_of(c.defect.iter().copied())
                })
                .collect();
            for (m, s) in ms.iter().zip(&sups) {
                report.fit(format!("defect_sup(n={n},m={m})"), *s);
            }
            let first = sups[0];
            let last = *sups.last().expect("non-empty");
            let factor = if last > 0.0 { first / last } else if first > 0.0 { f64::INFINITY } else { 1.0 };
            report.fit(format!("defect_decay(n={n})"), factor);
            if first == 0.0 && last == 0.0 {
                // No interaction at all (u0 = 0).
                continue;
            }
            worst = worst.min(factor);
            envelope_ok &= sups.iter().all(|&s| s <= first);
            strict &= sups.windows(2).all(|w| w[1] < w[0]);
        }
        if worst.is_infinite() && zero_datum {
            report.verdicts.push(Verdict::at_most(
                "defect_decay",
                "with u0 = 0 the superposition defect vanishes identically",
                max_of(cases.iter().flat_map(|c| c.defect.iter().copied())),
                0.0,
            ));
        } else {
            let v = Verdict::at_least(
                "defect_decay",
                "for fixed n the sup-in-time superposition defect drops along the m-sweep: first / last",
                worst,
                tol.m_decay_factor,
            );
            let passed = v.passed && envelope_ok;
            let detail = format!("{}; envelope {}", v.detail, if envelope_ok { "holds" } else { "violated" });
            report.verdicts.push(Verdict { passed, ..v }.with_detail(detail));
        }
        report.verdicts.push(
            Verdict::new(
                "defect_strictly_decreasing",
                "the sup-in-time superposition defect decreases strictly at every step of the m-sweep",
                strict,
                if strict { 1.0 } else { 0.0 },
                1.0,
                format!("{} m values", ms.len()),
            )
            .observation(),
        );
    }

    // End-to-end separation at the largest m.
    let horizon = min_of(cases.iter().map(|c| c.horizon));
    let t0 = window_end(cfg, horizon);
    report.fit("horizon", horizon);
    report.fit("T0", t0);
    let times = &cases[0].times;
    let win = window(times, cfg.window_start, t0);
    let top = top_two(&ns);
    let refs: Vec<&Case> = cases.iter().filter(|c| c.reference.is_some()).collect();
    let c0 = min_of(
        refs.iter()
            .filter(|c| top.contains(&c.n))
            .flat_map(|c| win.iter().map(move |&i| c.reference.as_ref().expect("reference")[i] / c.times[i])),
    );
    report.fit("c0", c0);
    if win.is_empty() {
        report.verdicts.push(Verdict::new(
            "separation_lower_bound",
            "the end-to-end separation at the largest m stays above a fraction of c0 t",
            false,
            0.0,
            tol.separation_fraction,
            format!("no snapshot in [{}, {t0}]", cfg.window_start),
        ));
        return Ok(report);
    }
    let fraction = min_of(
        refs.iter()
            .flat_map(|c| win.iter().map(move |&i| c.separation[i] / (c0 * c.times[i]))),
    );
    report.fit("separation_fraction", fraction);
    report.verdicts.push(Verdict::at_least(
        "separation_lower_bound",
        "the end-to-end separation at the largest m stays above a fraction of c0 t on the window: min sigma / (c0 t)",
        fraction,
        tol.separation_fraction,
    ));

    // sigma >= sigma_ref - C ||(I - S_n) u0|| - 2^{-n}, reported only.
    let slack = min_of(refs.iter().flat_map(|c| {
        let tail = levels.iter().find(|l| l.n == c.n).expect("level").tail;
        let budget = error_c.max(0.0) * tail + 2f64.powi(-(c.n as i32));
        win.iter()
            .map(move |&i| c.separation[i] - (c.reference.as_ref().expect("reference")[i] - budget))
    }));
    report.fit("budget_slack", slack);
    report.verdicts.push(
        Verdict::at_least(
            "separation_budget",
            "the separation exceeds the reference separation minus the tail budget and 2^{-n}",
            slack,
            0.0,
        )
        .observation(),
    );
    Ok(report)
}
