//! Standalone SVG plots written as plain text. Output depends only on the
//! input, byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::fpde::{DispersiveReport, FieldSnapshot};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    LogLog,
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Drawn dashed, as a reference line rather than data.
    pub reference: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub axes: Axes,
    pub series: Vec<Series>,
}

impl Plot {
    /// `|I(λ)|` against `λ` with the theoretical rate scaled through the
    /// largest observed ratio.
    pub fn decay(r: &BoundReport) -> Self {
        let data = r.samples.iter().map(|s| (s.lambda, s.abs_i)).collect();
        let reference = r.samples.iter().map(|s| (s.lambda, r.max_ratio * s.envelope)).collect();
        Plot {
            title: format!("{} alpha={} beta={} k={}", r.resolved, r.alpha, r.beta, r.k),
            x_label: "lambda".into(),
            y_label: "|I(lambda)|".into(),
            axes: Axes::LogLog,
            series: vec![
                Series { label: "|I|".into(), points: data, reference: false },
                Series { label: format!("rate x {:.3e}", r.max_ratio), points: reference, reference: true },
            ],
        }
    }

    /// `sup|u(t,·)|` against `t` with the envelope times `‖ψ̂‖₁`.
    pub fn dispersive(r: &DispersiveReport) -> Self {
        let (data, envelope) = r.series();
        Plot {
            title: format!("dispersive decay alpha={}", r.alpha),
            x_label: "t".into(),
            y_label: "sup |u(t,x)|".into(),
            axes: Axes::LogLog,
            series: vec![
                Series { label: "sup |u|".into(), points: data, reference: false },
                Series { label: "envelope x |psi_hat|_1".into(), points: envelope, reference: true },
            ],
        }
    }

    /// `|u(t,x)|` against `x`.
    pub fn field(s: &FieldSnapshot) -> Self {
        Plot {
            title: format!("|u(t,x)| at t={}", s.t),
            x_label: "x".into(),
            y_label: "|u|".into(),
            axes: Axes::Linear,
            series: vec![Series { label: "|u|".into(), points: s.series(), reference: false }],
        }
    }
}

fn ticks_linear(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Data bounds in plot coordinates (log10 for log axes), padded when flat.
fn bounds(series: &[Vec<(f64, f64)>]) -> (f64, f64, f64, f64) {
    let pts = series.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let pad = |a: f64, b: f64| if b - a > 0.0 { (a, b) } else { (a - 0.5, b + 0.5) };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    (x0, x1, y0, y1)
}

pub fn render_svg(plot: &Plot) -> Result<String> {
    let log = plot.axes == Axes::LogLog;
    let mapped: Vec<Vec<(f64, f64)>> = plot
        .series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter(|&&(x, y)| x.is_finite() && y.is_finite() && (!log || (x > 0.0 && y > 0.0)))
                .map(|&(x, y)| if log { (x.log10(), y.log10()) } else { (x, y) })
                .collect()
        })
        .collect();
    if plot.series.is_empty() || mapped.iter().zip(&plot.series).any(|(m, s)| m.is_empty() && !s.reference) {
        return Err(Error::Svg(format!("'{}' has an empty data series", plot.title)));
    }
    let (x0, x1, y0, y1) = bounds(&mapped);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut o = String::new();
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(o, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(o, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, esc(&plot.title));
    let _ = writeln!(o, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    let (xt, yt) = if log {
        let dec = |a: f64, b: f64| (a.ceil() as i64..=b.floor() as i64).map(|e| e as f64).collect::<Vec<_>>();
        (dec(x0, x1), dec(y0, y1))
    } else {
        (ticks_linear(x0, x1), ticks_linear(y0, y1))
    };
    let label = |v: f64| if log { format!("1e{}", v as i64) } else { fmt_tick(v) };
    for &t in &xt {
        let x = sx(t);
        let _ = writeln!(o, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{TOP}" stroke="#ddd"/>"##, TOP + ph);
        let _ = writeln!(o, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 16.0, label(t));
    }
    for &t in &yt {
        let y = sy(t);
        let _ = writeln!(o, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, LEFT + pw);
        let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, label(t));
    }
    let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 14.0, esc(&plot.x_label));
    let _ = writeln!(
        o,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        esc(&plot.y_label)
    );

    let colors = ["#1f4e9c", "#c0392b", "#2e7d32", "#6a1b9a"];
    for (i, (s, pts)) in plot.series.iter().zip(&mapped).enumerate() {
        if pts.is_empty() {
            continue;
        }
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let (class, dash) = if s.reference { ("reference", r#" stroke-dasharray="6 4""#) } else { ("data", "") };
        let _ = writeln!(
            o,
            r#"<polyline class="{class}" fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            colors[i % colors.len()],
            coords.join(" ")
        );
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{ly:.2}" text-anchor="end" fill="{}">{}</text>"#,
            LEFT + pw - 8.0,
            colors[i % colors.len()],
            esc(&s.label)
        );
    }
    o.push_str("</svg>\n");
    Ok(o)
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg(plot: &Plot, path: &Path) -> Result<()> {
    let text = render_svg(plot)?;
    std::fs::write(path, text)?;
    Ok(())
}
