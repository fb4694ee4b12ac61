//! Minimal SVG time-series plots.
//!
//! Each panel is a set of polylines on a fixed 800 x 240 frame with ticks
//! spaced at a power of ten.

use std::fmt::Write;

use crate::sim::Trajectory;

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 240.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 30.0;
/// Points kept per polyline; longer series are decimated.
const MAX_POINTS: usize = 2000;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// One plot panel.
pub struct Panel<'a> {
    pub title: &'a str,
    pub x: &'a [f64],
    pub series: Vec<(String, Vec<f64>)>,
}

/// Tick step `10^k` giving between 2 and 10 ticks across `span`.
pub fn tick_step(span: f64) -> f64 {
    if !(span > 0.0) || !span.is_finite() {
        return 1.0;
    }
    let mut step = 10f64.powf(span.log10().floor());
    if span / step < 2.0 {
        step /= 10.0;
    }
    step
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(hi - lo);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1.0 + lo.abs());
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn draw_panel(out: &mut String, panel: &Panel, offset: f64) {
    let (x0, x1) = range(panel.x.iter().copied());
    let (y0, y1) = range(panel.series.iter().flat_map(|(_, v)| v.iter().copied()));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = PANEL_HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| offset + TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{:.1}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##,
        offset + TOP
    );
    let _ = writeln!(
        out,
        r#"<text x="{LEFT}" y="{:.1}" font-size="14">{}</text>"#,
        offset + TOP - 8.0,
        panel.title
    );
    for t in ticks(x0, x1) {
        let x = sx(t);
        let yb = offset + TOP + ph;
        let _ = writeln!(
            out,
            r##"<line x1="{x:.1}" y1="{yb:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/>"##,
            yb + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
            yb + 18.0,
            label(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="#444"/>"##,
            LEFT - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            label(t)
        );
    }
    let stride = panel.x.len().div_ceil(MAX_POINTS).max(1);
    for (c, (name, values)) in panel.series.iter().enumerate() {
        let colour = COLOURS[c % COLOURS.len()];
        let mut pts = String::new();
        let last = panel.x.len().saturating_sub(1);
        for i in (0..panel.x.len()).step_by(stride).chain(std::iter::once(last)) {
            if i < values.len() && values[i].is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(panel.x[i]), sy(values[i]));
            }
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.2" points="{}"/>"#,
            pts.trim_end()
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{colour}" text-anchor="end">{name}</text>"#,
            WIDTH - RIGHT - 4.0,
            offset + TOP + 14.0 * (c as f64 + 1.0)
        );
    }
}

/// Renders stacked panels into one SVG document.
pub fn render(panels: &[Panel]) -> String {
    let height = PANEL_HEIGHT * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {height}" width="{WIDTH}" height="{height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, p) in panels.iter().enumerate() {
        draw_panel(&mut out, p, i as f64 * PANEL_HEIGHT);
    }
    out.push_str("</svg>\n");
    out
}

/// `θ(t)`, `y(t)` and `u(t)` panels of a trajectory.
pub fn trajectory_plot(traj: &Trajectory) -> String {
    let n = traj.dim();
    let cols = |m: &nalgebra::DMatrix<f64>, name: &str| {
        (0..n)
            .map(|j| (format!("{name}_{}", j + 1), m.column(j).iter().copied().collect()))
            .collect::<Vec<_>>()
    };
    let panels = [
        Panel {
            title: "theta(t)",
            x: &traj.times,
            series: cols(&traj.theta, "theta"),
        },
        Panel {
            title: "y(t)",
            x: &traj.times,
            series: vec![("y".into(), traj.y.clone())],
        },
        Panel {
            title: "u(t)",
            x: &traj.times,
            series: cols(&traj.u, "u"),
        },
    ];
    render(&panels)
}
