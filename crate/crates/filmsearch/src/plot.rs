//! Minimal SVG line and scatter plots for bundles and maps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use filmsearch_core::embedding::EnvironmentMap;
use filmsearch_core::material::Category;
use serde::Deserialize;
use thiserror::Error;

use crate::bundle;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: no data rows", .0.display())]
    Empty(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SpectrumRow {
    pub lambda_nm: f64,
    pub angle_deg: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TraceRow {
    pub episode: usize,
    pub best_merit: f64,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, PlotError> {
    let csv_err = |source| PlotError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let rows: Vec<T> = r.deserialize().collect::<Result<_, _>>().map_err(csv_err)?;
    if rows.is_empty() {
        return Err(PlotError::Empty(path.to_path_buf()));
    }
    Ok(rows)
}

pub fn read_spectrum_csv(path: &Path) -> Result<Vec<SpectrumRow>, PlotError> {
    read_csv(path)
}

pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>, PlotError> {
    read_csv(path)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

/// A line chart with fixed axis ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub series: Vec<Series>,
}

const W: f64 = 720.0;
const H: f64 = 440.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 150.0, 40.0, 55.0); // left, right, top, bottom

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
}

/// Frame, ticks and labels; returns the data-to-pixel mapping.
fn axes(out: &mut String, x_range: (f64, f64), y_range: (f64, f64), x_label: &str, y_label: &str) -> impl Fn(f64, f64) -> (f64, f64) {
    let (l, r, t, b) = MARGIN;
    let (x0, x1) = widen(x_range.0, x_range.1);
    let (y0, y1) = widen(y_range.0, y_range.1);
    let map = move |x: f64, y: f64| (l + (x - x0) / (x1 - x0) * (W - l - r), H - b - (y - y0) / (y1 - y0) * (H - t - b));
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - l - r, H - t - b);
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, _) = map(xv, y0);
        let (_, py) = map(x0, yv);
        let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="black"/>"#, H - b, H - b + 5.0);
        let _ = writeln!(out, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, H - b + 18.0, tick(xv));
        let _ = writeln!(out, r#"<line x1="{}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/>"#, l - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, l - 8.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, l + (W - l - r) / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        t + (H - t - b) / 2.0,
        escape(y_label)
    );
    map
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}

fn legend(out: &mut String, items: &[(String, &str)]) {
    let x = W - MARGIN.1 + 12.0;
    for (i, (label, color)) in items.iter().enumerate() {
        let y = MARGIN.2 + 10.0 + 18.0 * i as f64;
        let _ = writeln!(out, r#"<rect x="{x}" y="{}" width="12" height="12" fill="{color}"/>"#, y - 10.0);
        let _ = writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 18.0, escape(label));
    }
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let mut out = String::new();
        svg_open(&mut out, &self.title);
        let map = axes(&mut out, self.x_range, self.y_range, &self.x_label, &self.y_label);
        for s in &self.series {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| {
                    let (px, py) = map(x, y);
                    format!("{px:.2},{py:.2}")
                })
                .collect();
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, s.color, pts.join(" "));
        }
        legend(&mut out, &self.series.iter().map(|s| (s.label.clone(), s.color)).collect::<Vec<_>>());
        out.push_str("</svg>\n");
        out
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// A, R and T against wavelength, one set of lines per angle. The x axis
/// spans exactly the wavelength grid.
type Getter = fn(&SpectrumRow) -> f64;

pub fn spectrum_plot(rows: &[SpectrumRow]) -> LinePlot {
    let mut angles: Vec<f64> = Vec::new();
    for r in rows {
        if !angles.contains(&r.angle_deg) {
            angles.push(r.angle_deg);
        }
    }
    let lo = rows.iter().map(|r| r.lambda_nm).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.lambda_nm).fold(f64::NEG_INFINITY, f64::max);
    let mut series = Vec::new();
    for (ai, &angle) in angles.iter().enumerate() {
        let at: Vec<&SpectrumRow> = rows.iter().filter(|r| r.angle_deg == angle).collect();
        let parts: [(&str, Getter); 3] = [("A", |r| r.a), ("R", |r| r.r), ("T", |r| r.t)];
        for (qi, (name, get)) in parts.iter().enumerate() {
            series.push(Series {
                label: format!("{name} @ {angle}°"),
                color: PALETTE[(3 * ai + qi) % PALETTE.len()],
                points: at.iter().map(|r| (r.lambda_nm, get(r))).collect(),
            });
        }
    }
    LinePlot {
        title: "Spectrum".into(),
        x_label: "wavelength (nm)".into(),
        y_label: "fraction".into(),
        x_range: (lo, hi),
        y_range: (0.0, 1.0),
        series,
    }
}

pub fn trace_plot(rows: &[TraceRow]) -> LinePlot {
    let finite = || rows.iter().map(|r| r.best_merit).filter(|m| m.is_finite());
    let lo = finite().fold(f64::INFINITY, f64::min);
    let hi = finite().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo.min(0.0), hi) } else { (0.0, 1.0) };
    LinePlot {
        title: "Search trace".into(),
        x_label: "episode".into(),
        y_label: "best merit".into(),
        x_range: (rows.first().map_or(0.0, |r| r.episode as f64), rows.last().map_or(1.0, |r| r.episode as f64)),
        y_range: (lo, hi),
        series: vec![Series {
            label: "best merit".into(),
            color: PALETTE[0],
            points: rows.iter().map(|r| (r.episode as f64, r.best_merit)).collect(),
        }],
    }
}

fn category_color(c: Category) -> &'static str {
    match c {
        Category::Metal => "#d62728",
        Category::Alloy => "#ff7f0e",
        Category::Semiconductor => "#2ca02c",
        Category::Dielectric => "#1f77b4",
        Category::Transparent => "#17becf",
        Category::Other => "#7f7f7f",
    }
}

/// Scatter of the map, coloured by category, with material names as
/// hover titles.
pub fn map_svg(map: &EnvironmentMap) -> String {
    let mut out = String::new();
    svg_open(&mut out, "Material environment");
    let to_px = axes(&mut out, (0.0, 1.0), (0.0, 1.0), "x", "y");
    for e in map.entries() {
        let (px, py) = to_px(e.point.x, e.point.y);
        let _ = writeln!(
            out,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="4" fill="{}" fill-opacity="0.8"><title>{}</title></circle>"#,
            category_color(e.category),
            escape(&e.name)
        );
    }
    let mut present: Vec<Category> = map.entries().iter().map(|e| e.category).collect();
    present.sort();
    present.dedup();
    legend(&mut out, &present.iter().map(|&c| (c.to_string(), category_color(c))).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Renders `spectrum.svg` and `trace.svg` from a bundle's CSV files and
/// returns the written paths.
pub fn render_bundle(dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    let spectrum = spectrum_plot(&read_spectrum_csv(&dir.join(bundle::SPECTRUM))?);
    let trace = trace_plot(&read_trace_csv(&dir.join(bundle::TRACE))?);
    let mut written = Vec::new();
    for (name, plot) in [("spectrum.svg", spectrum), ("trace.svg", trace)] {
        let path = dir.join(name);
        fs::write(&path, plot.to_svg()).map_err(|source| PlotError::Io { path: path.clone(), source })?;
        written.push(path);
    }
    Ok(written)
}
