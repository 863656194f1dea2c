//! Minimal static SVG: line charts and direction sets on the circle.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(s, "<!-- germlab {} -->", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, W / 2.0, esc(title)).unwrap();
    s
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Line chart; `log_x`/`log_y` plot `log10` of the coordinate and drop
/// nonpositive values.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool, log_y: bool) -> String {
    let tx = |v: f64| if log_x { v.log10() } else { v };
    let ty = |v: f64| if log_y { v.log10() } else { v };
    let keep = |&(x, y): &(f64, f64)| (!log_x || x > 0.0) && (!log_y || y > 0.0) && x.is_finite() && y.is_finite();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied().filter(keep)).map(|(x, y)| (tx(x), ty(y))).collect();
    let mut s = open(title);
    if all.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let (mut x0, mut x1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (mut y0, mut y1) = all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    writeln!(s, r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#444"/>"##, W - 2.0 * PAD, H - 2.0 * PAD).unwrap();
    let lx = if log_x { format!("log10 {x_label}") } else { x_label.to_string() };
    let ly = if log_y { format!("log10 {y_label}") } else { y_label.to_string() };
    writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 14.0, esc(&lx)).unwrap();
    writeln!(s, r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#, H / 2.0, H / 2.0, esc(&ly)).unwrap();
    for (v, anchor_y) in [(x0, H - PAD + 14.0), (x1, H - PAD + 14.0)] {
        writeln!(s, r#"<text x="{:.1}" y="{anchor_y}" font-family="sans-serif" font-size="10" text-anchor="middle">{:.3}</text>"#, px(v), v).unwrap();
    }
    for v in [y0, y1] {
        writeln!(s, r#"<text x="{}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{:.3}</text>"#, PAD - 4.0, py(v) + 3.0, v).unwrap();
    }
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .copied()
            .filter(keep)
            .map(|(x, y)| format!("{:.2},{:.2}", px(tx(x)), py(ty(y))))
            .collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" ")).unwrap();
        let ly = PAD + 14.0 + 16.0 * i as f64;
        writeln!(s, r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#, PAD + 8.0, esc(ser.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Unit directions drawn on a circle; 3D sets use the orthographic view
/// down the third axis with lower-hemisphere points hollow.
pub fn direction_plot(title: &str, sets: &[(&str, &[Vec<f64>])]) -> String {
    let mut s = open(title);
    let (cx, cy, r) = (W / 2.0, H / 2.0 + 10.0, (H - 2.0 * PAD) / 2.0);
    writeln!(s, r##"<circle cx="{cx}" cy="{cy}" r="{r}" fill="none" stroke="#999"/>"##).unwrap();
    writeln!(s, r##"<line x1="{}" y1="{cy}" x2="{}" y2="{cy}" stroke="#ddd"/>"##, cx - r, cx + r).unwrap();
    writeln!(s, r##"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="#ddd"/>"##, cy - r, cy + r).unwrap();
    for (i, (label, dirs)) in sets.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let rad = 4.5 - 1.5 * i as f64;
        for d in dirs.iter() {
            let (x, y) = (d.first().copied().unwrap_or(0.0), d.get(1).copied().unwrap_or(0.0));
            let hollow = d.get(2).is_some_and(|z| *z < 0.0);
            let fill = if hollow { "none" } else { color };
            writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="{rad}" fill="{fill}" stroke="{color}"/>"#,
                cx + r * x,
                cy - r * y
            )
            .unwrap();
        }
        writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#, PAD / 2.0, PAD + 16.0 * i as f64, esc(label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
