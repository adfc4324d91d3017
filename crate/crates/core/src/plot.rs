//! Minimal static SVG line plots.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::spectral::SweepTable;

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub series: Vec<Series>,
    pub log_x: bool,
}

const W: f64 = 560.0;
const H: f64 = 360.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn panel_svg(out: &mut String, p: &Panel, y0: f64) -> Result<()> {
    let tx = |x: f64| if p.log_x { x.log10() } else { x };
    let pts: Vec<(f64, f64)> = p
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!p.log_x || *x > 0.0))
        .map(|(x, y)| (tx(x), y))
        .collect();
    if pts.is_empty() {
        return Err(Error::EmptyData(format!("panel `{}` has no finite points", p.title)));
    }
    let (mut xl, mut xh, mut yl, mut yh) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if xh - xl < 1e-300 {
        xl -= 0.5;
        xh += 0.5;
    }
    if yh - yl < 1e-12 * yl.abs().max(1.0) {
        yl -= 0.5;
        yh += 0.5;
    }
    let pad = 0.05 * (yh - yl);
    yl -= pad;
    yh += pad;
    let (l, r, t, b) = MARGIN;
    let sx = |x: f64| l + (x - xl) / (xh - xl) * (W - l - r);
    let sy = |y: f64| y0 + t + (yh - y) / (yh - yl) * (H - t - b);

    let _ = writeln!(
        out,
        r##"<rect x="{l}" y="{}" width="{}" height="{}" fill="none" stroke="#333"/>"##,
        y0 + t,
        W - l - r,
        H - t - b
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        y0 + 24.0,
        escape(&p.title)
    );
    for v in ticks(xl, xh) {
        let label = if p.log_x { format!("1e{v}") } else { format!("{v}") };
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
            sx(v),
            y0 + H - b + 16.0,
            label
        );
    }
    for v in ticks(yl, yh) {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#,
            l - 6.0,
            sy(v) + 4.0,
            format_tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        (l + W - r) / 2.0,
        y0 + H - 8.0,
        escape(&p.xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {0})">{1}</text>"#,
        y0 + (t + H - b) / 2.0,
        escape(&p.ylabel)
    );
    for (k, s) in p.series.iter().enumerate() {
        // NaN points break the polyline into segments
        let mut seg: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, out: &mut String| {
            if seg.len() > 1 {
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
                    PALETTE[k % PALETTE.len()],
                    seg.join(" "),
                    escape(&s.name)
                );
            }
            seg.clear();
        };
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() && (!p.log_x || x > 0.0) {
                seg.push(format!("{:.2},{:.2}", sx(tx(x)), sy(y)));
            } else {
                flush(&mut seg, out);
            }
        }
        flush(&mut seg, out);
    }
    Ok(())
}

fn format_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Panels stacked vertically in one document.
pub fn render_svg(panels: &[Panel]) -> Result<String> {
    if panels.is_empty() {
        return Err(Error::EmptyData("nothing to plot".into()));
    }
    let height = H * panels.len() as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{height}\" viewBox=\"0 0 {W} {height}\" font-family=\"sans-serif\">\n"
    );
    for (i, p) in panels.iter().enumerate() {
        panel_svg(&mut out, p, H * i as f64)?;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Real and imaginary parts of every track against the swept parameter,
/// eigenvalues in units of `scale`.
pub fn sweep_panels(t: &SweepTable, scale: f64, xlabel: &str) -> Vec<Panel> {
    let part = |title: &str, f: fn(crate::linalg::C64) -> f64| Panel {
        title: title.into(),
        xlabel: xlabel.into(),
        ylabel: title.into(),
        series: (0..t.track_count())
            .map(|k| Series {
                name: format!("track {k}"),
                points: t
                    .grid
                    .iter()
                    .zip(&t.tracks)
                    .map(|(p, row)| (*p, row.get(k).map_or(f64::NAN, |z| f(*z) / scale)))
                    .collect(),
            })
            .collect(),
        log_x: false,
    };
    vec![part("Re λ/Λ", |z| z.re), part("Im λ/Λ", |z| z.im)]
}
