//! Minimal SVG line chart with a logarithmic x axis.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

pub struct Line<'a> {
    pub label: &'a str,
    pub ys: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Tick spacing of 1, 2 or 5 times a power of ten giving at most ~8 ticks.
fn nice_step(span: f64) -> f64 {
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    for f in [1.0, 2.0, 5.0, 10.0] {
        if f * mag >= raw {
            return f * mag;
        }
    }
    10.0 * mag
}

fn fmt_tick(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Renders the lines against `xs` (all positive). `y_scale` multiplies the
/// plotted values, e.g. 100 for percent.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, xs: &[f64], lines: &[Line], y_scale: f64) -> String {
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let (x0, x1) = (lx[0], lx[lx.len() - 1]);
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for l in lines {
        for &y in l.ys.iter().filter(|y| y.is_finite()) {
            y_min = y_min.min(y * y_scale);
            y_max = y_max.max(y * y_scale);
        }
    }
    if !(y_max > y_min) {
        let pad = if y_min.is_finite() {
            y_min.abs().max(1.0) * 0.1
        } else {
            1.0
        };
        y_min = if y_min.is_finite() { y_min - pad } else { -1.0 };
        y_max = y_min + 2.0 * pad;
    }
    let step = nice_step(y_max - y_min);
    let y_lo = (y_min / step).floor() * step;
    let y_hi = (y_max / step).ceil() * step;

    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |l: f64| LEFT + if x1 > x0 { (l - x0) / (x1 - x0) * pw } else { pw / 2.0 };
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // decade ticks
    s.push_str("<g stroke=\"#dddddd\">\n");
    let mut ticks = String::new();
    for d in (x0.floor() as i32)..=(x1.ceil() as i32) {
        let l = d as f64;
        if l < x0 - 1e-9 || l > x1 + 1e-9 {
            continue;
        }
        let x = px(l);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}"/>"#,
            TOP + ph
        );
        let _ = writeln!(
            ticks,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            fmt_tick(10f64.powi(d))
        );
    }
    let n_y = ((y_hi - y_lo) / step).round() as i64;
    for i in 0..=n_y {
        let v = y_lo + i as f64 * step;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/>"#,
            LEFT + pw
        );
        let _ = writeln!(
            ticks,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    s.push_str(&ticks);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    for (i, l) in lines.iter().enumerate() {
        let pts: Vec<String> = lx
            .iter()
            .zip(l.ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y * y_scale)))
            .collect();
        let dash = if l.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="2"{dash} points="{}"/>"#,
            escape(l.color),
            pts.join(" ")
        );
        // legend
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let lx0 = LEFT + pw - 170.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx0:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"{dash}/>"#,
            lx0 + 24.0,
            escape(l.color)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx0 + 30.0,
            ly + 4.0,
            escape(l.label)
        );
    }
    s.push_str("</svg>\n");
    s
}
