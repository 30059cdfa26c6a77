use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epdiff_core::perturbations::BasePreset;
use epdiff_harness::{run_to_dir, Experiment, ExperimentConfig, HarnessError};
use toml::{Table, Value};

/// Numerical experiments for the EPDiff equations on a periodic box.
///
/// Settings come from the experiment defaults, then `--config`, then the
/// flags below. Exit status: 0 when every gating verdict passes, 1 when one
/// fails, 2 on errors.
#[derive(Parser)]
#[command(name = "epdiff", version)]
struct Cli {
    /// TOML configuration file; unknown keys are errors.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for report.json, CSV tables and plots.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = automatic).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Skip SVG plots.
    #[arg(long, global = true)]
    no_plots: bool,
    /// Print the merged configuration as TOML and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dyadic block identity and ring containment of the packets.
    Localize(Overrides),
    /// Besov-norm scaling of the packets and bumps against n.
    Scaling(Overrides),
    /// Separation lower bound from the zero datum.
    Separation(Overrides),
    /// Three-part splitting of the separation around a nonzero datum.
    Nowhere(Overrides),
    /// Constants of the operator, product, interpolation and Bernstein inequalities.
    Inequalities(Overrides),
    /// Temporal order, energy drift and resolution check of the solver.
    Converge(Overrides),
}

#[derive(Args, Default)]
struct Overrides {
    #[arg(long)]
    dim: Option<usize>,
    /// Grid points per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<usize>>,
    /// Box lengths per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<f64>>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Summability index; a number or `inf`.
    #[arg(long)]
    r: Option<String>,
    /// Allow Besov indices outside the theorem range.
    #[arg(long)]
    diagnostic: bool,
    #[arg(long, value_delimiter = ',')]
    n_range: Option<Vec<u32>>,
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<f64>>,
    #[arg(long)]
    n_damp: Option<f64>,
    /// zero, gaussian-vortexlike or low-frequency-random.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    cfl_safety: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    #[arg(long)]
    window_start: Option<f64>,
    /// Skip the half-step rerun of the separation fit.
    #[arg(long)]
    no_dt_refinement: bool,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k_list: Option<Vec<f64>>,
    #[arg(long)]
    case_count: Option<usize>,
    #[arg(long)]
    refinement: Option<usize>,
    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tolerances: Vec<(String, f64)>,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn floats(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Float(x)).collect())
}

fn ints<T: Copy + Into<i64>>(v: &[T]) -> Value {
    Value::Array(v.iter().map(|&x| Value::Integer(x.into())).collect())
}

fn set(t: &mut Table, section: Option<&str>, key: &str, v: Value) {
    match section {
        None => {
            t.insert(key.to_string(), v);
        }
        Some(s) => {
            let entry = t.entry(s.to_string()).or_insert_with(|| Value::Table(Table::new()));
            if let Value::Table(inner) = entry {
                inner.insert(key.to_string(), v);
            }
        }
    }
}

fn patch(cli: &Cli, o: &Overrides) -> Result<Table, HarnessError> {
    let mut t = Table::new();
    if let Some(v) = o.dim {
        set(&mut t, None, "dim", Value::Integer(v as i64));
    }
    if let Some(v) = &o.points {
        let v: Vec<i64> = v.iter().map(|&x| x as i64).collect();
        set(&mut t, None, "points", ints(&v));
    }
    if let Some(v) = &o.lengths {
        set(&mut t, None, "lengths", floats(v));
    }
    if let Some(v) = o.s {
        set(&mut t, Some("besov"), "s", Value::Float(v));
    }
    if let Some(v) = o.p {
        set(&mut t, Some("besov"), "p", Value::Float(v));
    }
    if let Some(v) = &o.r {
        let value = if v == "inf" {
            Value::String(v.clone())
        } else {
            Value::Float(v.parse().map_err(|e| HarnessError::Config(format!("--r {v:?}: {e}")))?)
        };
        set(&mut t, Some("besov"), "r", value);
    }
    if o.diagnostic {
        set(&mut t, None, "diagnostic", Value::Boolean(true));
    }
    if let Some(v) = &o.n_range {
        set(&mut t, None, "n_range", ints(v));
    }
    if let Some(v) = &o.m_list {
        set(&mut t, None, "m_list", floats(v));
    }
    if let Some(v) = o.n_damp {
        set(&mut t, None, "n_damp", Value::Float(v));
    }
    if let Some(v) = &o.preset {
        let preset: BasePreset = v.parse()?;
        set(&mut t, Some("base"), "preset", Value::String(preset.name().to_string()));
    }
    if let Some(v) = o.amplitude {
        set(&mut t, Some("base"), "amplitude", Value::Float(v));
    }
    if let Some(v) = cli.seed {
        let v = i64::try_from(v).map_err(|_| HarnessError::Config(format!("--seed {v} exceeds {}", i64::MAX)))?;
        set(&mut t, Some("base"), "seed", Value::Integer(v));
    }
    if let Some(v) = o.dt {
        set(&mut t, Some("solver"), "dt", Value::Float(v));
    }
    if let Some(v) = o.t_max {
        set(&mut t, Some("solver"), "t_max", Value::Float(v));
    }
    if let Some(v) = o.cfl_safety {
        set(&mut t, Some("solver"), "cfl_safety", Value::Float(v));
    }
    if let Some(v) = &o.snapshot_times {
        set(&mut t, Some("solver"), "snapshot_times", floats(v));
    }
    if let Some(v) = o.window_start {
        set(&mut t, None, "window_start", Value::Float(v));
    }
    if o.no_dt_refinement {
        set(&mut t, None, "dt_refinement", Value::Boolean(false));
    }
    if let Some(v) = &o.k_list {
        set(&mut t, None, "k_list", floats(v));
    }
    if let Some(v) = o.case_count {
        set(&mut t, None, "case_count", Value::Integer(v as i64));
    }
    if let Some(v) = o.refinement {
        set(&mut t, None, "refinement", Value::Integer(v as i64));
    }
    for (k, v) in &o.tolerances {
        set(&mut t, Some("tolerances"), k, Value::Float(*v));
    }
    if let Some(v) = &cli.out {
        set(&mut t, None, "output", Value::String(v.display().to_string()));
    }
    if let Some(v) = cli.threads {
        set(&mut t, None, "threads", Value::Integer(v as i64));
    }
    if cli.no_plots {
        set(&mut t, None, "plots", Value::Boolean(false));
    }
    Ok(t)
}

fn execute(cli: &Cli) -> Result<bool, HarnessError> {
    let (exp, o) = match &cli.command {
        Command::Localize(o) => (Experiment::Localize, o),
        Command::Scaling(o) => (Experiment::Scaling, o),
        Command::Separation(o) => (Experiment::Separation, o),
        Command::Nowhere(o) => (Experiment::Nowhere, o),
        Command::Inequalities(o) => (Experiment::Inequalities, o),
        Command::Converge(o) => (Experiment::Converge, o),
    };
    let cfg = ExperimentConfig::load(exp, cli.config.as_deref(), Some(patch(cli, o)?))?;
    if cli.print_config {
        print!("{}", toml::to_string(&cfg).map_err(|e| HarnessError::Config(e.to_string()))?);
        return Ok(true);
    }
    let (report, files) = run_to_dir(exp, &cfg)?;
    print!("{}", report.summary());
    for n in &report.notes {
        println!("note: {n}");
    }
    println!(
        "{} in {:.1} s; {} files in {}",
        exp.name(),
        report.runtime.elapsed_seconds,
        files.len(),
        cfg.output.display()
    );
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
