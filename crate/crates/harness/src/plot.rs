//! Minimal SVG line plots drawn from the CSV tables after a run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::report::{ExperimentReport, Table};

/// What to draw from one table: `y` against `x`, one line per value of
/// `group` (if any).
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub table: &'static str,
    pub x: &'static str,
    pub y: &'static str,
    pub group: Option<&'static str>,
    pub log_y: bool,
    pub title: &'static str,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

/// Renders one plot. Non-positive values are skipped on a log axis.
pub fn render(table: &Table, spec: &PlotSpec) -> Result<String> {
    let col = |name: &str| {
        table.column(name).ok_or_else(|| HarnessError::Schema {
            table: table.name.clone(),
            reason: format!("no column {name:?} to plot"),
        })
    };
    let xs = col(spec.x)?;
    let ys = col(spec.y)?;
    let groups = match spec.group {
        Some(g) => col(g)?,
        None => vec![0.0; xs.len()],
    };
    let tf = |y: f64| if spec.log_y { y.log10() } else { y };
    let mut keys: Vec<f64> = groups.clone();
    keys.sort_by(|a, b| a.partial_cmp(b).expect("finite keys"));
    keys.dedup();

    let pts: Vec<(f64, f64, f64)> = xs
        .iter()
        .zip(&ys)
        .zip(&groups)
        .filter(|((_, &y), _)| y.is_finite() && (!spec.log_y || y > 0.0))
        .map(|((&x, &y), &g)| (x, tf(y), g))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y, _) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, spec.title);
    let _ = writeln!(
        svg,
        r#"<path d="M{PAD} {PAD} V{} H{}" stroke="black" fill="none"/>"#,
        H - PAD,
        W - PAD
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let ylab = if spec.log_y { format!("1e{fy:.1}") } else { format!("{fy:.3e}") };
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{}" text-anchor="middle">{fx:.3}</text>"#, sx(fx), H - PAD + 18.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.1}" text-anchor="end">{ylab}</text>"#, PAD - 6.0, sy(fy) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, spec.x);
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        spec.y
    );
    for (gi, key) in keys.iter().enumerate() {
        let color = COLORS[gi % COLORS.len()];
        let mut line: Vec<(f64, f64)> = pts.iter().filter(|p| p.2 == *key).map(|p| (p.0, p.1)).collect();
        line.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let path: Vec<String> = line.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for (x, y) in &line {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(*x), sy(*y));
        }
        if let Some(g) = spec.group {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{color}">{g} = {key}</text>"#,
                W - PAD + 4.0 - 60.0,
                PAD + 16.0 * gi as f64
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Reads each table named in `specs` back from `dir` and writes
/// `<table>_<y>.svg` next to it.
pub fn emit(report: &ExperimentReport, dir: &Path, specs: &[PlotSpec]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for spec in specs {
        let Some(meta) = report.table(spec.table) else {
            continue;
        };
        let table = Table::read_csv(&dir.join(meta.file_name()), &meta.name, &meta.columns)?;
        let svg = render(&table, spec)?;
        let path = dir.join(format!("{}_{}.svg", spec.table, spec.y));
        std::fs::write(&path, svg).map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
        out.push(path);
    }
    Ok(out)
}
