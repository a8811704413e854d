//! Minimal SVG chart of bandwidth against amplitude.

use std::fmt::Write;

use crate::experiments::{SweepCurve, TrialStatus};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

struct Band {
    amplitude: f64,
    mean: f64,
    lo: f64,
    hi: f64,
}

fn bands(curve: &SweepCurve) -> Vec<Band> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for p in &curve.points {
        if p.status == TrialStatus::Failed {
            continue;
        }
        let b = p.bandwidth.unwrap_or(0.0);
        match out.last_mut() {
            Some((a, v)) if *a == p.amplitude => v.push(b),
            _ => out.push((p.amplitude, vec![b])),
        }
    }
    out.into_iter()
        .map(|(amplitude, v)| Band {
            amplitude,
            mean: v.iter().sum::<f64>() / v.len() as f64,
            lo: v.iter().copied().fold(f64::INFINITY, f64::min),
            hi: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
        .collect()
}

/// Mean bandwidth per amplitude with a shaded min-max band across trials.
pub fn bandwidth_svg(curves: &[SweepCurve]) -> String {
    let all: Vec<Vec<Band>> = curves.iter().map(bands).collect();
    let x_max = all.iter().flatten().map(|b| b.amplitude).fold(0.0, f64::max).max(1e-9);
    let y_max = all.iter().flatten().map(|b| b.hi).fold(0.0, f64::max).max(1e-9) * 1.05;
    let x = |a: f64| MARGIN + a / x_max * (WIDTH - 2.0 * MARGIN);
    let y = |b: f64| HEIGHT - MARGIN - b / y_max * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, y0, x1, y1) = (x(0.0), y(0.0), x(x_max), y(y_max));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1},{y1:.1} V{y0:.1} H{x1:.1}" stroke="black" fill="none"/>"#
    );
    for i in 0..=5 {
        let (a, b) = (x_max * i as f64 / 5.0, y_max * i as f64 / 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{a:.2}</text>"#,
            x(a),
            y0 + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{b:.1}</text>"#,
            x0 - 6.0,
            y(b) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">Torque amplitude [Nm]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">Bandwidth [Hz]</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    for (i, (curve, bands)) in curves.iter().zip(&all).enumerate() {
        if bands.is_empty() {
            continue;
        }
        let colour = COLOURS[i % COLOURS.len()];
        let upper = bands.iter().map(|b| format!("{:.1},{:.1}", x(b.amplitude), y(b.hi)));
        let lower = bands
            .iter()
            .rev()
            .map(|b| format!("{:.1},{:.1}", x(b.amplitude), y(b.lo)));
        let outline: Vec<String> = upper.chain(lower).collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{colour}" fill-opacity="0.2" stroke="none"/>"#,
            outline.join(" ")
        );
        let line: Vec<String> = bands
            .iter()
            .map(|b| format!("{:.1},{:.1}", x(b.amplitude), y(b.mean)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"/>"#,
            line.join(" ")
        );
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{ly:.1}" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            curve.configuration.label()
        );
    }
    s.push_str("</svg>\n");
    s
}
