//! Static SVG line charts of `run` and `bench` output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Mean y per x for one line of the chart.
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

fn column(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h == name)
}

fn parse_cell(record: &csv::StringRecord, idx: usize, line: u64) -> CliResult<Option<f64>> {
    let cell = record.get(idx).unwrap_or("").trim();
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|_| CliError::Io(format!("line {line}: not a number: {cell:?}")))
}

/// Reads a `bench` CSV (y = median_seconds, log scale) or a `run` CSV
/// (y = root_msve) and averages y over rows sharing a series and n.
pub fn chart_from_csv<R: Read>(source: R, title: &str) -> CliResult<Chart> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let headers = reader.headers()?.clone();
    let (y_name, log_y) = if column(&headers, "median_seconds").is_some() {
        ("median_seconds", true)
    } else if column(&headers, "root_msve").is_some() {
        ("root_msve", false)
    } else {
        return Err(CliError::Io("CSV has neither a median_seconds nor a root_msve column".into()));
    };
    let y_col = column(&headers, y_name).expect("checked above");
    let x_col = column(&headers, "n").ok_or_else(|| CliError::Io("CSV has no n column".into()))?;
    let method_col = column(&headers, "method").ok_or_else(|| CliError::Io("CSV has no method column".into()))?;
    let lambda_col = column(&headers, "lambda_used");

    let mut sums: BTreeMap<String, BTreeMap<u64, (f64, f64, usize)>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i as u64 + 2;
        let method = record.get(method_col).unwrap_or("").to_string();
        let label = match (lambda_col, method.ends_with("-fixed")) {
            (Some(c), true) => format!("{method} λ={}", record.get(c).unwrap_or("")),
            _ => method,
        };
        let (Some(x), Some(y)) = (parse_cell(&record, x_col, line)?, parse_cell(&record, y_col, line)?) else {
            continue;
        };
        if !x.is_finite() || !y.is_finite() || (log_y && y <= 0.0) {
            continue;
        }
        if !sums.contains_key(&label) {
            order.push(label.clone());
        }
        let cell = sums.entry(label).or_default().entry(x.to_bits()).or_insert((x, 0.0, 0));
        cell.1 += y;
        cell.2 += 1;
    }
    let series = order
        .into_iter()
        .map(|label| {
            let mut points: Vec<(f64, f64)> = sums[&label].values().map(|(x, s, c)| (*x, s / *c as f64)).collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series { label, points }
        })
        .collect();
    Ok(Chart {
        title: title.to_string(),
        x_label: "n".into(),
        y_label: y_name.into(),
        log_y,
        series,
    })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Axis mapping from data to pixel coordinates.
struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        let (v, lo, hi) = if self.log {
            (v.log10(), self.lo.log10(), self.hi.log10())
        } else {
            (v, self.lo, self.hi)
        };
        let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
        self.px_lo + t * (self.px_hi - self.px_lo)
    }
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn linear_ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>) {
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let step = nice_step(hi - lo, 5);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let count = ((end - start) / step).round() as usize;
    let ticks = (0..=count).map(|i| start + i as f64 * step).collect();
    (start, end, ticks)
}

/// Decade ticks 10^a..10^b covering [lo, hi].
fn decade_ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>) {
    let a = lo.log10().floor() as i32;
    let mut b = hi.log10().ceil() as i32;
    if b == a {
        b += 1;
    }
    let ticks = (a..=b).map(|e| 10f64.powi(e)).collect();
    (10f64.powi(a), 10f64.powi(b), ticks)
}

fn decade_label(v: f64) -> String {
    format!("1e{}", v.log10().round() as i32)
}

fn tick_label(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

pub fn render_svg(chart: &Chart) -> String {
    let mut svg = String::new();
    let plot_right = WIDTH - RIGHT;
    let plot_bottom = HEIGHT - BOTTOM;
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if !chart.title.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            (LEFT + plot_right) / 2.0,
            escape(&chart.title)
        );
    }
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{LEFT}" y1="{plot_bottom}" x2="{plot_right}" y2="{plot_bottom}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{plot_bottom}"/></g>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (LEFT + plot_right) / 2.0,
        HEIGHT - 14.0,
        escape(&chart.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{}</text>"#,
        escape(&chart.y_label),
        y = (TOP + plot_bottom) / 2.0
    );

    let points: Vec<(f64, f64)> = chart.series.iter().flat_map(|s| s.points.iter().copied()).collect();
    if points.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" fill="gray">no data</text>"#,
            (LEFT + plot_right) / 2.0,
            (TOP + plot_bottom) / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }

    let (x_min, x_max) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y_min, y_max) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));

    let log_x = x_min > 0.0 && x_max / x_min >= 10.0;
    let mut x_ticks: Vec<f64> = points.iter().map(|p| p.0).collect();
    x_ticks.sort_by(f64::total_cmp);
    x_ticks.dedup();
    if x_ticks.len() > 12 {
        x_ticks = linear_ticks(x_min, x_max).2;
    }
    let x_scale = Scale {
        lo: x_min,
        hi: x_max,
        log: log_x,
        px_lo: LEFT + 16.0,
        px_hi: plot_right - 16.0,
    };
    let (y_lo, y_hi, y_ticks) = if chart.log_y {
        decade_ticks(y_min, y_max)
    } else {
        linear_ticks(y_min.min(0.0), y_max)
    };
    let y_scale = Scale {
        lo: y_lo,
        hi: y_hi,
        log: chart.log_y,
        px_lo: plot_bottom,
        px_hi: TOP,
    };

    svg.push_str(r#"<g class="x-ticks" text-anchor="middle">"#);
    svg.push('\n');
    for t in &x_ticks {
        let x = x_scale.map(*t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{plot_bottom}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}">{}</text>"#,
            plot_bottom + 5.0,
            plot_bottom + 18.0,
            tick_label(*t)
        );
    }
    svg.push_str("</g>\n");
    svg.push_str(r#"<g class="y-ticks" text-anchor="end">"#);
    svg.push('\n');
    for t in &y_ticks {
        let y = y_scale.map(*t);
        let label = if chart.log_y { decade_label(*t) } else { tick_label(*t) };
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><line x1="{LEFT}" y1="{y:.2}" x2="{plot_right}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{}" y="{:.2}">{label}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    svg.push_str("</g>\n");

    for (i, s) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", x_scale.map(*x), y_scale.map(*y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        for (x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x_scale.map(*x),
                y_scale.map(*y)
            );
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = plot_right + 16.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{lx}" y="{}" width="16" height="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            ly - 2.0,
            lx + 22.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
