//! SVG line charts for the harness CSVs.
//!
//! The chart kind follows the CSV header: convergence files give one series
//! per `(method, delta_omega)` on a logarithmic error axis, reconstruction
//! files give a true/fit overlay, samples and spectrum files give the signal
//! and its magnitude spectrum.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{HarnessError, Result};
use crate::records::{
    self, ConvergenceRecord, CsvRow, ReconstructionRow, SampleRow, SpectrumRow,
};

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Which convergence column goes on the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    RelativeRmse,
    Rmse,
    TestRmse,
}

impl Metric {
    fn label(self) -> &'static str {
        match self {
            Metric::RelativeRmse => "relative RMSE",
            Metric::Rmse => "RMSE",
            Metric::TestRmse => "test RMSE",
        }
    }

    fn value(self, r: &ConvergenceRecord) -> Option<f64> {
        match self {
            Metric::RelativeRmse => Some(r.relative_rmse),
            Metric::Rmse => Some(r.rmse),
            Metric::TestRmse => r.test_rmse,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "relative_rmse" => Ok(Metric::RelativeRmse),
            "rmse" => Ok(Metric::Rmse),
            "test_rmse" => Ok(Metric::TestRmse),
            _ => Err(format!("unknown metric `{s}` (expected relative_rmse, rmse or test_rmse)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: Option<String>,
    pub metric: Metric,
    pub width: f64,
    pub height: f64,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self { title: None, metric: Metric::default(), width: 800.0, height: 500.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Schema {
    Convergence,
    Reconstruction,
    Samples,
    Spectrum,
}

fn detect(path: &Path, bytes: &[u8]) -> Result<Schema> {
    let first = bytes.split(|&b| b == b'\n').next().unwrap_or_default();
    let header: Vec<&str> = std::str::from_utf8(first)
        .unwrap_or_default()
        .trim_end_matches('\r')
        .split(',')
        .collect();
    let known = [
        (ConvergenceRecord::HEADER, Schema::Convergence),
        (ReconstructionRow::HEADER, Schema::Reconstruction),
        (SampleRow::HEADER, Schema::Samples),
        (SpectrumRow::HEADER, Schema::Spectrum),
    ];
    known
        .iter()
        .find(|(h, _)| h[..] == header[..])
        .map(|&(_, s)| s)
        .ok_or_else(|| HarnessError::Parse {
            path: path.to_path_buf(),
            row: 1,
            message: "header matches none of the known CSV schemas".into(),
        })
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Reads the CSVs and builds the chart they describe. All files must share one schema.
pub fn load_chart(paths: &[PathBuf], spec: &PlotSpec) -> Result<Chart> {
    if paths.is_empty() {
        return Err(HarnessError::usage("plot needs at least one CSV file"));
    }
    let mut files = Vec::with_capacity(paths.len());
    for p in paths {
        let bytes = std::fs::read(p).map_err(|e| HarnessError::io(p, e))?;
        files.push((p, detect(p, &bytes)?, bytes));
    }
    let schema = files[0].1;
    if files.iter().any(|f| f.1 != schema) {
        return Err(HarnessError::usage("plot inputs mix different CSV schemas"));
    }
    let many = files.len() > 1;
    let title = |default: &str| spec.title.clone().unwrap_or_else(|| default.to_string());

    let chart = match schema {
        Schema::Convergence => {
            let mut groups: BTreeMap<(String, Option<usize>), Vec<(f64, f64)>> = BTreeMap::new();
            for (p, _, bytes) in &files {
                for r in records::parse_csv::<ConvergenceRecord>(p, bytes)? {
                    if let Some(y) = spec.metric.value(&r) {
                        groups
                            .entry((r.method.to_string(), r.delta_omega))
                            .or_default()
                            .push((r.update_count as f64, y));
                    }
                }
            }
            let series = groups
                .into_iter()
                .map(|((method, dw), mut points)| {
                    points.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let label = match dw {
                        Some(dw) => format!("{method} Δω={dw}"),
                        None => method,
                    };
                    Series { label, points }
                })
                .collect();
            Chart {
                title: title("Convergence"),
                x_label: "updates N".into(),
                y_label: spec.metric.label().into(),
                log_y: true,
                series,
            }
        }
        Schema::Reconstruction => {
            let mut series = Vec::new();
            for (p, _, bytes) in &files {
                let rows = records::parse_csv::<ReconstructionRow>(p, bytes)?;
                let suffix = if many { format!(" ({})", stem(p)) } else { String::new() };
                if !many || series.is_empty() {
                    series.push(Series {
                        label: format!("true{suffix}"),
                        points: rows.iter().map(|r| (r.x, r.f_true)).collect(),
                    });
                }
                series.push(Series { label: format!("fit{suffix}"), points: rows.iter().map(|r| (r.x, r.f_fit)).collect() });
            }
            Chart { title: title("Reconstruction"), x_label: "x".into(), y_label: "f(x)".into(), log_y: false, series }
        }
        Schema::Samples => {
            let mut series = Vec::new();
            for (p, _, bytes) in &files {
                let rows = records::parse_csv::<SampleRow>(p, bytes)?;
                series.push(Series { label: stem(p), points: rows.iter().map(|r| (r.x, r.f)).collect() });
            }
            Chart { title: title("Signal"), x_label: "x".into(), y_label: "f(x)".into(), log_y: false, series }
        }
        Schema::Spectrum => {
            let mut series = Vec::new();
            for (p, _, bytes) in &files {
                let rows = records::parse_csv::<SpectrumRow>(p, bytes)?;
                series.push(Series { label: stem(p), points: rows.iter().map(|r| (r.frequency, r.magnitude)).collect() });
            }
            Chart {
                title: title("Spectrum"),
                x_label: "angular frequency".into(),
                y_label: "|F|".into(),
                log_y: true,
                series,
            }
        }
    };
    Ok(chart)
}

pub fn render_plot(paths: &[PathBuf], spec: &PlotSpec) -> Result<String> {
    Ok(render_chart(&load_chart(paths, spec)?, spec.width, spec.height))
}

pub fn write_plot(paths: &[PathBuf], spec: &PlotSpec, out: &Path) -> Result<()> {
    let svg = render_plot(paths, spec)?;
    std::fs::write(out, svg).map_err(|e| HarnessError::io(out, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Round step of 1, 2 or 5 times a power of ten giving about `count` intervals.
fn nice_step(span: f64, count: usize) -> f64 {
    let raw = span / count.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 5);
    let mut t = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    while t <= hi + step * 1e-9 {
        ticks.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.0e}")
    }
}

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

/// Renders `chart` as standalone SVG 1.1. Output depends only on the input.
pub fn render_chart(chart: &Chart, width: f64, height: f64) -> String {
    let (left, right, top, bottom) = (80.0, 190.0, 40.0, 55.0);
    let pw = (width - left - right).max(10.0);
    let ph = (height - top - bottom).max(10.0);

    let xs = chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).filter(|v| v.is_finite());
    let (x_lo, x_hi) = padded_range(xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max));

    let ys: Vec<f64> = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|v| v.is_finite() && (!chart.log_y || *v > 0.0))
        .collect();
    let y_min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let y_max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // On a log axis the plotted coordinate is log10(y); non-positive values sit on the floor.
    let (y_lo, y_hi, y_ticks): (f64, f64, Vec<f64>) = if chart.log_y {
        let (lo, hi) = if ys.is_empty() { (-1.0, 0.0) } else { (y_min.log10().floor(), y_max.log10().ceil()) };
        let hi = if hi <= lo { lo + 1.0 } else { hi };
        let stride = ((hi - lo) / 8.0).ceil().max(1.0);
        let mut ticks = Vec::new();
        let mut d = lo;
        while d <= hi {
            ticks.push(d);
            d += stride;
        }
        (lo, hi, ticks)
    } else {
        let (lo, hi) = padded_range(y_min, y_max);
        let pad = 0.05 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        (lo, hi, linear_ticks(lo, hi))
    };
    let to_y = |v: f64| -> f64 {
        let c = if chart.log_y { if v > 0.0 { v.log10() } else { y_lo } } else { v };
        top + ph * (1.0 - (c - y_lo) / (y_hi - y_lo))
    };
    let to_x = |v: f64| left + pw * (v - x_lo) / (x_hi - x_lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text class="title" x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(&chart.title)
    );

    // Grid and tick labels.
    let _ = writeln!(s, r##"<g class="axes" stroke="#dddddd" stroke-width="1">"##);
    let x_ticks = linear_ticks(x_lo, x_hi);
    for &t in &x_ticks {
        let x = to_x(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{:.2}"/>"#, top + ph);
    }
    for &t in &y_ticks {
        let y = if chart.log_y { to_y(10f64.powf(t)) } else { to_y(t) };
        let _ = writeln!(s, r#"<line x1="{left:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#, left + pw);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for &t in &x_ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            to_x(t),
            top + ph + 16.0,
            fmt_tick(t)
        );
    }
    for &t in &y_ticks {
        let (y, label) = if chart.log_y {
            (to_y(10f64.powf(t)), format!("1e{}", t as i64))
        } else {
            (to_y(t), fmt_tick(t))
        };
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text class="x-label" x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        height - 14.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text class="y-label" x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&chart.y_label)
    );

    for (i, series) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = series
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", to_x(x), to_y(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
    }

    let lx = left + pw + 15.0;
    for (i, series) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = top + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<g class="legend-entry"><line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            lx + 20.0,
            lx + 26.0,
            y + 4.0,
            escape(&series.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
