//! Experiment report assembly: the shared CSV schema, summary constants,
//! and dependency-free SVG sweep plots.
//!
//! Every experiment emits the same 13-column CSV so downstream tooling
//! parses one schema; columns an experiment does not use stay empty.
//! Cells use Rust's shortest round-trip float formatting and rows are
//! assembled in deterministic order, so a rerun with the same seed is
//! byte-identical.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const CSV_COLUMNS: [&str; 13] = [
    "instance_id",
    "grid",
    "p",
    "alpha",
    "gamma",
    "epsilon",
    "sigma",
    "lambda",
    "lhs",
    "rhs1",
    "rhs2",
    "C_emp",
    "verdict",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// the inequality held vacuously (all-zero gradient instance)
    Vacuous,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS-PASS",
        }
    }
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail)
    }
}

/// One experiment's table plus its named summary constants. Runtimes
/// stay out of the CSV on purpose: the files must be byte-identical
/// across reruns.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub name: String,
    pub rows: Vec<[String; 13]>,
    /// named constants: fitted pairs, per-ε constants, suite maxima
    pub summary: Vec<(String, String)>,
    pub verdict: Verdict,
    /// (label, points) per instance for the λ-sweep plots
    pub sweeps: Vec<(String, Vec<(f64, f64)>)>,
}

pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>) -> Self {
        ExperimentReport {
            name: name.into(),
            rows: Vec::new(),
            summary: Vec::new(),
            verdict: Verdict::Pass,
            sweeps: Vec::new(),
        }
    }

    pub fn push_summary(&mut self, key: impl Into<String>, value: f64) {
        self.summary.push((key.into(), fmt_num(value)));
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&CSV_COLUMNS.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in &self.summary {
            let _ = writeln!(out, "{k},{v}");
        }
        let _ = writeln!(out, "verdict,{}", self.verdict.as_str());
        out
    }

    /// Writes `<name>.csv`, `<name>_summary.csv` and one SVG per sweep;
    /// returns the main CSV path.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let main = dir.join(format!("{}.csv", self.name));
        std::fs::write(&main, self.csv())?;
        std::fs::write(dir.join(format!("{}_summary.csv", self.name)), self.summary_csv())?;
        for (label, points) in &self.sweeps {
            if points.len() >= 2 {
                let svg = svg_log_log_plot(&format!("{} {label}", self.name), points);
                std::fs::write(dir.join(format!("{}_{label}.svg", self.name)), svg)?;
            }
        }
        Ok(main)
    }
}

/// Minimal log-log polyline plot emitted as a raw SVG path (no plotting
/// dependency). Non-positive values are dropped.
pub fn svg_log_log_plot(title: &str, points: &[(f64, f64)]) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.log10(), y.log10()))
        .collect();
    let (w, h, margin) = (640.0, 480.0, 60.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        w / 2.0,
        title
    );
    let _ = writeln!(
        svg,
        "<rect x=\"{margin}\" y=\"{margin}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - 2.0 * margin,
        h - 2.0 * margin
    );
    if pts.len() >= 2 {
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x1 - x0 < 1e-12 {
            x1 = x0 + 1.0;
        }
        if y1 - y0 < 1e-12 {
            y1 = y0 + 1.0;
        }
        let sx = |x: f64| margin + (x - x0) / (x1 - x0) * (w - 2.0 * margin);
        let sy = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);
        let mut path = String::new();
        for (k, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, sx(x), sy(y));
        }
        let _ = writeln!(
            svg,
            "<path d=\"{}\" fill=\"none\" stroke=\"#0057b7\" stroke-width=\"1.5\"/>",
            path.trim()
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">log10 lambda: {:.2} .. {:.2}</text>",
            w / 2.0,
            h - 18.0,
            x0,
            x1
        );
        let _ = writeln!(
            svg,
            "<text x=\"18\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">log10 value: {:.2} .. {:.2}</text>",
            h / 2.0,
            h / 2.0,
            y0,
            y1
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Builds one CSV row from optional cells; `None` renders empty.
pub fn row(cells: [Option<String>; 13]) -> [String; 13] {
    cells.map(|c| c.unwrap_or_default())
}
