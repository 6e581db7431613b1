//! Static SVG figures: exponent per mode with the signal/noise cut, and
//! log-log fluctuation curves with their fitted lines.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mvdenoise::signal::write_atomic;
use mvdenoise::{DenoiseReport, FluctuationCurve};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Linear map from data range onto the plot area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
            (lo - pad, hi + pad)
        };
        Self {
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn open(svg: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{title}</text>
<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{ylabel}</text>
"#,
        W / 2.0,
        (LEFT + W - RIGHT) / 2.0,
        H - 12.0,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
    );
}

fn axes(svg: &mut String, f: &Frame, xticks: &[(f64, String)], yticks: usize) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for (v, label) in xticks {
        let x = f.px(*v);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#,
            y1 + 5.0,
            y1 + 19.0
        );
    }
    for i in 0..=yticks {
        let v = f.y.0 + (f.y.1 - f.y.0) * i as f64 / yticks as f64;
        let y = f.py(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{v:.2}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0
        );
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

/// Exponent per mode index, with a dashed line between the last retained
/// mode and the first rejected one.
pub fn alpha_vs_k(report: &DenoiseReport) -> String {
    let alphas = &report.mode_scores.alphas;
    let k = alphas.len();
    let f = Frame::new((1.0, k as f64), range(alphas.iter().copied()));
    let mut svg = String::new();
    open(&mut svg, "Scaling exponent per mode", "mode index k", "α");
    let ticks: Vec<(f64, String)> = (1..=k).map(|i| (i as f64, i.to_string())).collect();
    axes(&mut svg, &f, &ticks, 5);

    let points: Vec<String> = alphas
        .iter()
        .enumerate()
        .map(|(i, a)| format!("{:.2},{:.2}", f.px(i as f64 + 1.0), f.py(*a)))
        .collect();
    let _ = writeln!(
        svg,
        r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##,
        points.join(" ")
    );
    let k1 = report.k1();
    for (i, a) in alphas.iter().enumerate() {
        let fill = if i < k1 { "#1f77b4" } else { "white" };
        let _ = writeln!(
            svg,
            r##"<circle class="mode" cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="#1f77b4"><title>k = {}, α = {a:.3}</title></circle>"##,
            f.px(i as f64 + 1.0),
            f.py(*a),
            i + 1
        );
    }
    if k1 < k {
        let x = f.px(k1 as f64 + 0.5);
        let _ = writeln!(
            svg,
            r##"<line class="cut" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{}" stroke="#d62728" stroke-dasharray="6 4"/><text x="{:.2}" y="{}" fill="#d62728">K1 = {k1}</text>"##,
            H - BOTTOM,
            x + 6.0,
            TOP + 16.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// ln F against ln s per mode with the fitted line, or `None` when no curve
/// has a fit to draw.
pub fn loglog_fluctuation(curves: &[FluctuationCurve]) -> Option<String> {
    let drawable: Vec<(usize, &FluctuationCurve)> = curves
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.degenerate && c.f_values.iter().filter(|&&v| v > 0.0).count() >= 2)
        .collect();
    if drawable.is_empty() {
        return None;
    }
    let pts = |c: &FluctuationCurve| -> Vec<(f64, f64)> {
        c.scales
            .iter()
            .zip(&c.f_values)
            .filter(|(_, &v)| v > 0.0)
            .map(|(&s, &v)| ((s as f64).ln(), v.ln()))
            .collect()
    };
    let xr = range(drawable.iter().flat_map(|(_, c)| pts(c)).map(|p| p.0));
    let yr = range(drawable.iter().flat_map(|(_, c)| pts(c)).map(|p| p.1));
    let f = Frame::new(xr, yr);
    let mut svg = String::new();
    open(&mut svg, "Fluctuation function per mode", "ln s", "ln F(s)");
    let ticks: Vec<(f64, String)> = drawable[0]
        .1
        .scales
        .iter()
        .map(|&s| ((s as f64).ln(), format!("{:.2}", (s as f64).ln())))
        .step_by(2)
        .collect();
    axes(&mut svg, &f, &ticks, 5);

    for (row, (k, c)) in drawable.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let p = pts(c);
        for (x, y) in &p {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                f.px(*x),
                f.py(*y)
            );
        }
        let (xa, xb) = (p[0].0, p[p.len() - 1].0);
        let b = c.intercept();
        let _ = writeln!(
            svg,
            r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.2"/>"#,
            f.px(xa),
            f.py(b + c.alpha * xa),
            f.px(xb),
            f.py(b + c.alpha * xb)
        );
        let _ = writeln!(
            svg,
            r#"<text class="slope" x="{}" y="{}" fill="{color}">k = {}: α = {:.3}</text>"#,
            LEFT + 8.0,
            TOP + 14.0 + 14.0 * row as f64,
            k + 1,
            c.alpha
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}

/// Writes both figures into `dir` and returns the paths written.
pub fn emit_plots(
    report: &DenoiseReport,
    curves: &[FluctuationCurve],
    dir: &Path,
) -> mvdenoise::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| mvdenoise::Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let alpha = dir.join("alpha_vs_k.svg");
    write_atomic(&alpha, alpha_vs_k(report).as_bytes())?;
    written.push(alpha);
    if let Some(svg) = loglog_fluctuation(curves) {
        let path = dir.join("loglog_fluctuation.svg");
        write_atomic(&path, svg.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
