//! CSV tables and SVG line charts.

use std::fmt::Write as _;

use crate::becsim::EnsembleResult;

pub const BEC_HEADER: &str = "t,p1,p2,f1,f2,q1,q2,stderr1";
pub const QUARTER_HEADER: &str = "alpha,beta,mu,nu,lambdaPlus,qPlus,qMinus,residual";

/// 17 significant digits; parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(",")
}

pub fn ensemble_csv(r: &EnsembleResult) -> String {
    let mut out = String::with_capacity(r.len() * 200);
    out.push_str(BEC_HEADER);
    out.push('\n');
    for k in 0..r.len() {
        out.push_str(&csv_row(&[r.times[k], r.p1[k], r.p2[k], r.f1[k], r.f2[k], r.q1[k], r.q2[k], r.std_err1[k]]));
        out.push('\n');
    }
    out
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Static SVG 1.1 chart of `ys` against `xs` with axes, tick labels and a caption.
pub fn line_chart(xs: &[f64], ys: &[f64], x_label: &str, y_label: &str, caption: &str) -> String {
    let x_max = xs.iter().copied().fold(f64::MIN, f64::max).max(1e-12);
    let x_min = xs.iter().copied().fold(f64::MAX, f64::min).min(x_max);
    let y_abs = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    // symmetric range so q = 0 sits on the midline
    let y_half = if y_abs > 0.0 { y_abs * 1.1 } else { 1.0 };
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x_min) / (x_max - x_min).max(1e-300) * plot_w;
    let py = |y: f64| MARGIN + (y_half - y) / (2.0 * y_half) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" stroke-width="1"><line x1="{MARGIN}" y1="{}" x2="{MARGIN}" y2="{}"/><line x1="{MARGIN}" y1="{y0:.2}" x2="{}" y2="{y0:.2}"/></g>"#,
        MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        y0 = py(0.0)
    );
    let _ = writeln!(svg, r#"<g font-family="sans-serif" font-size="12" fill="black">"#);
    for i in 0..=4 {
        let x = x_min + (x_max - x_min) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(x),
            HEIGHT - MARGIN + 18.0,
            trim(x)
        );
        let y = -y_half + 2.0 * y_half * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            py(y) + 4.0,
            trim(y)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="30" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(caption)
    );
    let _ = writeln!(svg, "</g>");
    let points: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ =
        writeln!(svg, r#"<polyline fill="none" stroke="steelblue" stroke-width="1" points="{}"/>"#, points.join(" "));
    let _ = writeln!(svg, "</svg>");
    svg
}

fn trim(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}
