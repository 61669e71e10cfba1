//! Minimal deterministic SVG 1.1 line plots.

use std::fmt::Write as _;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug, Default)]
pub struct Axis {
    pub label: String,
    pub log: bool,
}

impl Axis {
    pub fn linear(label: &str) -> Self {
        Axis { label: label.into(), log: false }
    }

    pub fn log(label: &str) -> Self {
        Axis { label: label.into(), log: true }
    }

    fn map(&self, v: f64) -> Option<f64> {
        if !v.is_finite() {
            return None;
        }
        if self.log {
            (v > 0.0).then(|| v.log10())
        } else {
            Some(v)
        }
    }
}

/// Straight reference line `y = c x^slope` through `anchor`.
#[derive(Clone, Copy, Debug)]
pub struct GuideLine {
    pub slope: f64,
    pub anchor: (f64, f64),
}

#[derive(Clone, Debug, Default)]
pub struct PlotSpec {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub guide: Option<GuideLine>,
}

#[derive(Clone, Debug)]
pub struct Curve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(name: &str, points: Vec<(f64, f64)>) -> Self {
        Curve { name: name.into(), points }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        return format!("1e{}", v.round() as i64);
    }
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e-3 && v.abs() < 1e4 {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap();
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
    let every = ((b - a) / 6 + 1).max(1);
    (a..=b).filter(|k| (k - a) % every == 0).map(|k| k as f64).collect()
}

fn padded(lo: f64, hi: f64, log: bool) -> (f64, f64) {
    if hi > lo {
        if log {
            (lo.floor().min(lo), hi.ceil().max(hi))
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

/// Renders the curves as polylines on shared axes. Points that cannot be
/// drawn (non-finite, or non-positive on a log axis) are dropped.
pub fn emit_svg(spec: &PlotSpec, curves: &[Curve]) -> Result<String> {
    let mapped: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| {
            c.points
                .iter()
                .filter_map(|&(x, y)| Some((spec.x.map(x)?, spec.y.map(y)?)))
                .collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = mapped.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(Error::Empty("plot data"));
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        all.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
    };
    let (x0, x1) = {
        let (a, b) = fold(|p| p.0);
        padded(a, b, spec.x.log)
    };
    let (y0, y1) = {
        let (a, b) = fold(|p| p.1);
        padded(a, b, spec.y.log)
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        num(WIDTH / 2.0),
        escape(&spec.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        num(LEFT),
        num(TOP),
        num(pw),
        num(ph)
    );

    let xt = if spec.x.log { log_ticks(x0, x1) } else { linear_ticks(x0, x1) };
    for t in xt {
        let x = num(sx(t));
        let _ = writeln!(
            s,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            num(TOP + ph),
            num(TOP + ph + 5.0),
            num(TOP + ph + 19.0),
            tick_label(t, spec.x.log)
        );
    }
    let yt = if spec.y.log { log_ticks(y0, y1) } else { linear_ticks(y0, y1) };
    for t in yt {
        let y = num(sy(t));
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/><text x="{}" y="{y}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            num(LEFT - 5.0),
            num(LEFT),
            num(LEFT - 8.0),
            tick_label(t, spec.y.log)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        num(LEFT + pw / 2.0),
        num(HEIGHT - 12.0),
        escape(&spec.x.label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
        escape(&spec.y.label),
        y = num(TOP + ph / 2.0)
    );

    if let Some(g) = spec.guide {
        if let (Some(ax), Some(ay)) = (spec.x.map(g.anchor.0), spec.y.map(g.anchor.1)) {
            // In log-log coordinates the guide is a straight line of the given slope.
            let line = |x: f64| ay + g.slope * (x - ax);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="6 4"/>"#,
                num(sx(x0)),
                num(sy(line(x0))),
                num(sx(x1)),
                num(sy(line(x1)))
            );
        }
    }

    let _ = writeln!(
        s,
        r#"<clipPath id="plot"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
        num(LEFT),
        num(TOP),
        num(pw),
        num(ph)
    );
    for (i, pts) in mapped.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        let coords: Vec<String> =
            pts.iter().map(|&(x, y)| format!("{},{}", num(sx(x)), num(sy(y)))).collect();
        let _ = writeln!(
            s,
            r#"<polyline clip-path="url(#plot)" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            coords.join(" ")
        );
    }
    if curves.len() > 1 {
        for (i, c) in curves.iter().enumerate() {
            let y = TOP + 14.0 + 16.0 * i as f64;
            let x = LEFT + pw - 150.0;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{y}" dominant-baseline="middle">{}</text>"#,
                num(x),
                num(x + 20.0),
                PALETTE[i % PALETTE.len()],
                num(x + 26.0),
                escape(&c.name),
                y = num(y)
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
