//! CSV tables and standalone SVG plots for band structures and DOS curves.

use std::fmt::Write as _;

use crate::bz::pretty_label;
use crate::numfmt::fmt_num;
use crate::spectra::{DosCurve, EigenvalueSet};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 28.0;
const BOTTOM: f64 = 40.0;

/// One row per k: `k_index,s,band_1..band_n`.
pub fn bands_csv(set: &EigenvalueSet) -> String {
    let mut out = String::from("k_index,s");
    for n in 1..=set.nbands() {
        let _ = write!(out, ",band_{n}");
    }
    out.push('\n');
    for (i, (s, row)) in set.path_coordinates().iter().zip(&set.bands).enumerate() {
        let _ = write!(out, "{},{}", i + 1, fmt_num(*s));
        for e in row {
            let _ = write!(out, ",{}", fmt_num(*e));
        }
        out.push('\n');
    }
    out
}

pub fn dos_csv(curve: &DosCurve) -> String {
    let mut out = String::from("energy_eV,dos_states_per_eV\n");
    for (e, v) in curve.grid.iter().zip(&curve.values) {
        let _ = writeln!(out, "{},{}", fmt_num(*e), fmt_num(*v));
    }
    out
}

/// Round tick values covering `[lo, hi]`, about `target` of them.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn open(&self, out: &mut String, title: &str, x_label: &str, y_label: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT}" y="{TOP}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            WIDTH - LEFT - RIGHT,
            HEIGHT - TOP - BOTTOM
        );
        for t in nice_ticks(self.y.0, self.y.1, 6) {
            let y = self.py(t);
            let _ = writeln!(
                out,
                r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"#,
                LEFT - 4.0,
                LEFT - 6.0,
                y + 4.0,
                fmt_num(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
            HEIGHT - 8.0,
            escape(x_label)
        );
        let _ = writeln!(
            out,
            r#"<text transform="translate(16 {:.1}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
            escape(y_label)
        );
    }

    fn polyline(&self, out: &mut String, xs: &[f64], ys: &[f64], colour: &str) {
        out.push_str(r#"<polyline fill="none" stroke=""#);
        out.push_str(colour);
        out.push_str(r#"" stroke-width="1.2" points=""#);
        for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.2},{:.2}", self.px(*x), self.py(y.clamp(self.y.0, self.y.1)));
        }
        out.push_str("\"/>\n");
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let pad = ((hi - lo) * 0.05).max(1e-3);
    (lo - pad, hi + pad)
}

/// Band structure along the path coordinate with labelled vertical lines at
/// `ticks` (label, s). `window` limits the energy axis.
pub fn bands_svg(set: &EigenvalueSet, ticks: &[(String, f64)], window: Option<(f64, f64)>, title: &str) -> String {
    let xs = set.path_coordinates();
    let x = (xs[0], *xs.last().unwrap());
    let x = if x.1 > x.0 { x } else { (x.0, x.0 + 1.0) };
    let y = window.unwrap_or_else(|| {
        let (lo, hi) = set.energy_range();
        padded(lo, hi)
    });
    let frame = Frame { x, y };
    let mut out = String::new();
    frame.open(&mut out, title, "k-path", "Energy (eV)");
    for (label, s) in ticks {
        let px = frame.px(*s);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#999"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            HEIGHT - BOTTOM,
            HEIGHT - BOTTOM + 16.0,
            escape(pretty_label(label))
        );
    }
    if y.0 < 0.0 && y.1 > 0.0 {
        let zy = frame.py(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{zy:.2}" x2="{:.2}" y2="{zy:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            WIDTH - RIGHT
        );
    }
    let occ = (set.electrons / u32::from(set.spin_degeneracy)) as usize;
    for n in 0..set.nbands() {
        let ys: Vec<f64> = set.band(n).collect();
        let colour = if n < occ { "#1f4e9c" } else { "#b8322a" };
        frame.polyline(&mut out, &xs, &ys, colour);
    }
    out.push_str("</svg>\n");
    out
}

/// DOS curve; `markers` draws labelled vertical lines (e.g. band edges).
pub fn dos_svg(curve: &DosCurve, markers: &[(String, f64)], title: &str) -> String {
    let x = (curve.grid[0], *curve.grid.last().unwrap());
    let top = curve.values.iter().cloned().fold(0.0, f64::max);
    let frame = Frame {
        x,
        y: (0.0, if top > 0.0 { top * 1.05 } else { 1.0 }),
    };
    let mut out = String::new();
    frame.open(&mut out, title, "Energy (eV)", "DOS (states/eV)");
    for t in nice_ticks(x.0, x.1, 8) {
        let px = frame.px(t);
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            HEIGHT - BOTTOM + 16.0,
            fmt_num(t)
        );
    }
    for (label, e) in markers {
        if *e < x.0 || *e > x.1 {
            continue;
        }
        let px = frame.px(*e);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/><text x="{:.2}" y="{:.2}">{}</text>"##,
            HEIGHT - BOTTOM,
            px + 3.0,
            TOP + 14.0,
            escape(label)
        );
    }
    frame.polyline(&mut out, &curve.grid, &curve.values, "#1f4e9c");
    out.push_str("</svg>\n");
    out
}
