//! Self-contained SVG charts for experiment tables.
//!
//! x is N, y is the cost value. Circles mark the mean over instances,
//! vertical `<line>` bars span ±1 sample standard deviation, and each
//! theory series is one `<polyline>`. Nothing else in the output uses
//! `<polyline>`, so counting them counts theory series.
//!
//! Colors: black global minimum, gray random search, red selection and
//! crossover, blue crossover offspring mean, green mean-field mixture.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::RunningStats;

use super::experiment::{Algorithm, ExperimentRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Fig2,
    Fig3,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(PlotKind::Fig2),
            "fig3" => Ok(PlotKind::Fig3),
            _ => Err(Error::Config(format!("unknown plot kind {s:?}, expected fig2 or fig3"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Series {
    Global,
    Random,
    Crossover,
    Offspring,
    MeanField,
}

impl Series {
    fn of(a: Algorithm) -> Series {
        match a {
            Algorithm::GlobalExact | Algorithm::GlobalApprox => Series::Global,
            Algorithm::RandomSearch => Series::Random,
            Algorithm::SelectionCrossover => Series::Crossover,
            Algorithm::CrossoverOffspring => Series::Offspring,
            Algorithm::MeanField => Series::MeanField,
        }
    }

    fn color(self) -> &'static str {
        match self {
            Series::Global => "black",
            Series::Random => "gray",
            Series::Crossover => "red",
            Series::Offspring => "blue",
            Series::MeanField => "green",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Series::Global => "global minimum",
            Series::Random => "random search",
            Series::Crossover => "selection + crossover",
            Series::Offspring => "offspring mean",
            Series::MeanField => "mean-field mixture",
        }
    }
}

/// What a panel plots from each row.
#[derive(Clone, Copy)]
enum Quantity {
    /// best_value, or offspring_mean for offspring rows; theory mean.
    Value,
    /// offspring_variance; theory variance.
    OffspringVariance,
}

struct Point {
    n: usize,
    mean: f64,
    sd: f64,
}

struct SeriesData {
    series: Series,
    points: Vec<Point>,
    theory: Vec<(usize, f64)>,
}

fn collect(rows: &[ExperimentRow], quantity: Quantity, keep: &[Series]) -> Vec<SeriesData> {
    let mut emp: BTreeMap<(Series, usize), RunningStats> = BTreeMap::new();
    let mut th: BTreeMap<(Series, usize), f64> = BTreeMap::new();
    for r in rows {
        let s = Series::of(r.algorithm);
        if !keep.contains(&s) {
            continue;
        }
        let (value, theory) = match quantity {
            Quantity::Value if s == Series::Offspring => (r.offspring_mean, r.theory_mean),
            Quantity::Value => (r.best_value, r.theory_mean),
            Quantity::OffspringVariance => (r.offspring_variance, r.theory_variance),
        };
        if let Some(v) = value.filter(|v| v.is_finite()) {
            emp.entry((s, r.n_dims)).or_default().push(v);
        }
        if let Some(t) = theory.filter(|t| t.is_finite()) {
            th.entry((s, r.n_dims)).or_insert(t);
        }
    }
    keep.iter()
        .map(|&series| SeriesData {
            series,
            points: emp
                .iter()
                .filter(|((s, _), _)| *s == series)
                .map(|(&(_, n), st)| Point { n, mean: st.mean(), sd: st.std_dev() })
                .collect(),
            theory: th.iter().filter(|((s, _), _)| *s == series).map(|(&(_, n), &t)| (n, t)).collect(),
        })
        .filter(|d| !d.points.is_empty() || !d.theory.is_empty())
        .collect()
}

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 360.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= target as f64).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn panel(svg: &mut String, x0: f64, title: &str, y_label: &str, data: &[SeriesData]) {
    let ns = data.iter().flat_map(|d| d.points.iter().map(|p| p.n).chain(d.theory.iter().map(|t| t.0)));
    let (mut nmin, mut nmax) = ns.fold((usize::MAX, 0), |(a, b), n| (a.min(n), b.max(n)));
    if nmin == usize::MAX {
        (nmin, nmax) = (0, 1);
    }
    let ys = data.iter().flat_map(|d| {
        d.points.iter().flat_map(|p| [p.mean - p.sd, p.mean + p.sd]).chain(d.theory.iter().map(|t| t.1))
    });
    let (mut ylo, mut yhi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
    if !ylo.is_finite() {
        (ylo, yhi) = (0.0, 1.0);
    }
    let pad = ((yhi - ylo) * 0.08).max(0.05);
    let (ylo, yhi) = (ylo - pad, yhi + pad);
    let (xlo, xhi) = (nmin as f64 - 1.0, nmax as f64 + 1.0);

    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let sx = |n: f64| x0 + MARGIN_L + (n - xlo) / (xhi - xlo) * plot_w;
    let sy = |y: f64| MARGIN_T + (yhi - y) / (yhi - ylo) * plot_h;

    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{title}</text>"#,
        fmt(x0 + MARGIN_L + plot_w / 2.0)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        fmt(x0 + MARGIN_L),
        fmt(MARGIN_T),
        fmt(plot_w),
        fmt(plot_h)
    );
    for t in nice_ticks(xlo, xhi, 6) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{t}</text>"#,
            fmt(x),
            fmt(MARGIN_T + plot_h + 16.0)
        );
    }
    for t in nice_ticks(ylo, yhi, 6) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            fmt(x0 + MARGIN_L - 6.0),
            fmt(y + 4.0),
            (t * 1000.0).round() / 1000.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">N</text>"#,
        fmt(x0 + MARGIN_L + plot_w / 2.0),
        fmt(PANEL_H - 10.0)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 {} {})">{y_label}</text>"#,
        fmt(x0 + 16.0),
        fmt(MARGIN_T + plot_h / 2.0),
        fmt(x0 + 16.0),
        fmt(MARGIN_T + plot_h / 2.0)
    );

    for d in data {
        let c = d.series.color();
        if !d.theory.is_empty() {
            let pts: Vec<String> = d.theory.iter().map(|&(n, t)| format!("{},{}", fmt(sx(n as f64)), fmt(sy(t)))).collect();
            let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, pts.join(" "));
        }
        for p in &d.points {
            let x = sx(p.n as f64);
            if p.sd > 0.0 {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="{c}"/>"#,
                    fmt(sy(p.mean - p.sd)),
                    fmt(sy(p.mean + p.sd)),
                    x = fmt(x)
                );
            }
            let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3.5" fill="{c}"/>"#, fmt(x), fmt(sy(p.mean)));
        }
    }

    for (i, d) in data.iter().enumerate() {
        let y = MARGIN_T + 10.0 + 18.0 * i as f64;
        let x = x0 + PANEL_W - MARGIN_R + 12.0;
        let _ = writeln!(svg, r#"<circle cx="{}" cy="{}" r="3.5" fill="{}"/>"#, fmt(x), fmt(y), d.series.color());
        let _ = writeln!(svg, r#"<text x="{}" y="{}" font-size="11">{}</text>"#, fmt(x + 8.0), fmt(y + 4.0), d.series.label());
    }
}

/// Renders a table as SVG text. Deterministic: the same rows give the
/// same bytes.
pub fn emit_plot(rows: &[ExperimentRow], kind: PlotKind) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("cannot plot an empty table".into()));
    }
    let panels: Vec<(&str, &str, Vec<SeriesData>)> = match kind {
        PlotKind::Fig2 => vec![(
            "best value vs N",
            "F",
            collect(
                rows,
                Quantity::Value,
                &[Series::Global, Series::Random, Series::Crossover, Series::Offspring],
            ),
        )],
        PlotKind::Fig3 => vec![
            (
                "A: best value vs N",
                "F",
                collect(rows, Quantity::Value, &[Series::Global, Series::Crossover, Series::MeanField]),
            ),
            (
                "B: offspring variance vs N",
                "offspring variance",
                collect(rows, Quantity::OffspringVariance, &[Series::Offspring, Series::MeanField]),
            ),
        ],
    };
    let width = PANEL_W * panels.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = width,
        h = PANEL_H
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, (title, y_label, data)) in panels.iter().enumerate() {
        panel(&mut svg, PANEL_W * i as f64, title, y_label, data);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn write_plot(path: &Path, rows: &[ExperimentRow], kind: PlotKind) -> Result<()> {
    let svg = emit_plot(rows, kind)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
