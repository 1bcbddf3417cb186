use std::fmt::Write;

use super::format::fmt_sig6;
use super::KdeCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

pub struct KdeSeries<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub curve: &'a KdeCurve,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// SVG 1.1 line plot of density curves, one polyline per series, with a
/// dashed vertical line at each series mean.
pub fn render_kde_svg(title: &str, x_label: &str, series: &[KdeSeries<'_>]) -> String {
    let x_min = series.iter().flat_map(|s| s.curve.grid.first()).copied().fold(f64::INFINITY, f64::min);
    let x_max = series.iter().flat_map(|s| s.curve.grid.last()).copied().fold(f64::NEG_INFINITY, f64::max);
    let y_max = series.iter().flat_map(|s| s.curve.density.iter()).copied().fold(0.0, f64::max);
    let (x_min, x_max) = if x_min.is_finite() && x_max > x_min { (x_min, x_max) } else { (0.0, 1.0) };
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };

    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x_min) / (x_max - x_min) * plot_w;
    let py = |y: f64| HEIGHT - MARGIN - y / y_max * plot_h;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(title)
    );
    // Axes.
    let _ = writeln!(
        out,
        r#"<path d="M{m} {top} L{m} {bottom} L{right} {bottom}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        top = MARGIN,
        bottom = HEIGHT - MARGIN,
        right = WIDTH - MARGIN
    );
    for i in 0..=4 {
        let x = x_min + (x_max - x_min) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            fmt_sig6(px(x)),
            HEIGHT - MARGIN + 16.0,
            fmt_sig6(x.round())
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {})">density</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (k, s) in series.iter().enumerate() {
        let points: Vec<String> = s
            .curve
            .grid
            .iter()
            .zip(&s.curve.density)
            .map(|(&x, &y)| format!("{},{}", fmt_sig6(px(x)), fmt_sig6(py(y))))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="series" data-label="{}" fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            escape(s.label),
            s.color,
            points.join(" ")
        );
        let mx = fmt_sig6(px(s.curve.mean));
        let _ = writeln!(
            out,
            r#"<line class="mean" data-label="{}" data-mean="{}" x1="{mx}" y1="{}" x2="{mx}" y2="{}" stroke="{}" stroke-dasharray="6 4"/>"#,
            escape(s.label),
            fmt_sig6(s.curve.mean),
            MARGIN,
            HEIGHT - MARGIN,
            s.color
        );
        let ly = MARGIN + 8.0 + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="12" fill="{}">{} (mean {})</text>"#,
            WIDTH - MARGIN - 150.0,
            s.color,
            escape(s.label),
            fmt_sig6(s.curve.mean)
        );
    }
    out.push_str("</svg>\n");
    out
}
