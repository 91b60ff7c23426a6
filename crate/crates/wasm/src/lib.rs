//! Browser bindings for the polydef demo page.
//!
//! Each export returns a JSON string so the page needs no generated
//! TypeScript glue beyond `wasm-bindgen`'s defaults. The plain functions
//! underneath are ordinary Rust and are tested natively.

use std::fmt::Write as _;

use polydef::bz::{build_kpath, HEX_PATH};
use polydef::crystal::{polytype, SiteClass, StackingSequence};
use polydef::fixtures;
use polydef::modelbands::{tb_solve, TbModel};
use polydef::plot::{bands_svg, dos_svg};
use polydef::spectra::{compute_dos, detect_flat_bands, find_band_edges, parse_eigenvalues};
use serde_json::json;
use wasm_bindgen::prelude::*;

const H_COLOUR: &str = "#c0392b";
const K_COLOUR: &str = "#2471a3";

/// Side view of a stacking: one row per bilayer, column = A/B/C lateral
/// position, coloured by site class.
pub fn stacking_view(stacking: &str) -> Result<String, String> {
    let seq: StackingSequence = stacking
        .trim()
        .parse()
        .map_err(|e: polydef::crystal::CrystalError| e.to_string())?;
    let s = polytype(&seq, polydef::crystal::DEFAULT_A, 2.52 * seq.len() as f64).map_err(|e| e.to_string())?;
    let n = seq.len();
    let (row, col, pad) = (38.0, 70.0, 40.0);
    let width = 2.0 * pad + 2.0 * col + 120.0;
    let height = 2.0 * pad + row * (n as f64 - 1.0) + 20.0;
    let x_of = |i: usize| pad + col * (seq.layers()[i].letter() as u8 - b'A') as f64;
    let y_of = |i: usize| height - pad - row * i as f64;

    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    for i in 0..n.saturating_sub(1) {
        let _ = write!(
            svg,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#888" stroke-width="2"/>"##,
            x_of(i),
            y_of(i),
            x_of(i + 1),
            y_of(i + 1)
        );
    }
    let (mut h, mut k) = (0, 0);
    for site in s.sites.iter().filter(|x| x.species == "Si") {
        let i = site.layer;
        let (colour, label) = match site.site_class {
            SiteClass::H => {
                h += 1;
                (H_COLOUR, "h")
            }
            _ => {
                k += 1;
                (K_COLOUR, "k")
            }
        };
        let _ = write!(
            svg,
            r##"<circle cx="{x}" cy="{y}" r="11" fill="{colour}"/><circle cx="{x}" cy="{cy}" r="6" fill="#333"/><text x="{tx}" y="{ty}">{letter} ({label})</text>"##,
            x = x_of(i),
            y = y_of(i),
            cy = y_of(i) - 13.0,
            tx = pad + 2.0 * col + 40.0,
            ty = y_of(i) + 4.0,
            letter = seq.layers()[i].letter(),
        );
    }
    svg.push_str("</svg>");
    Ok(json!({ "svg": svg, "layers": n, "atoms": s.sites.len(), "h": h, "k": k }).to_string())
}

/// Tight-binding bands of the pristine polytype along Γ-M-K-Γ-A-L-H-A.
pub fn tb_bands(stacking: &str, a: f64, c: f64, points: usize) -> Result<String, String> {
    let seq: StackingSequence = stacking
        .trim()
        .parse()
        .map_err(|e: polydef::crystal::CrystalError| e.to_string())?;
    let s = polytype(&seq, a, c).map_err(|e| e.to_string())?;
    let model = TbModel::from_json(fixtures::SIC_SP3_TB).map_err(|e| e.to_string())?;
    let path = build_kpath(&s.cell, &HEX_PATH, points).map_err(|e| e.to_string())?;
    let set = tb_solve(&s, &model, &path).map_err(|e| e.to_string())?;
    let edges = find_band_edges(&set).map_err(|e| e.to_string())?;
    let window = Some((edges.vbm - 8.0, edges.cbm + 6.0));
    let svg = bands_svg(&set, &path.ticks(), window, &format!("{stacking} tight-binding bands"));
    Ok(json!({ "svg": svg, "vbm": edges.vbm, "cbm": edges.cbm, "gap": edges.gap, "bands": set.nbands() }).to_string())
}

/// DOS of a bundled spectrum with the in-gap flat bands it carries.
pub fn defect_dos(name: &str, sigma: f64) -> Result<String, String> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(format!("sigma must be positive, got {sigma}"));
    }
    let (_, eig, _) = fixtures::spectrum(name).ok_or_else(|| format!("unknown spectrum '{name}'"))?;
    let set = parse_eigenvalues(eig).map_err(|e| e.to_string())?;
    let pristine = parse_eigenvalues(fixtures::PRISTINE_EIG).map_err(|e| e.to_string())?;
    let host = find_band_edges(&pristine).map_err(|e| e.to_string())?;
    let edges = find_band_edges(&set).map_err(|e| e.to_string())?;
    let (lo, hi) = set.energy_range();
    let (e_min, e_max) = (lo - 6.0 * sigma, hi + 6.0 * sigma);
    let n = (((e_max - e_min) / (sigma / 10.0)).ceil() as usize + 1).clamp(2, 20_000);
    let curve = compute_dos(&set, e_min, e_max, n, sigma).map_err(|e| e.to_string())?;
    let markers = [("VBM".to_string(), edges.vbm), ("CBM".to_string(), edges.cbm)];
    let svg = dos_svg(&curve, &markers, &format!("{name} DOS, sigma = {sigma} eV"));
    let flat = detect_flat_bands(&set, (host.vbm, host.cbm), 0.2).map_err(|e| e.to_string())?;
    let midpoint = 0.5 * (host.vbm + host.cbm);
    let flat: Vec<_> = flat
        .iter()
        .map(|f| {
            json!({
                "band": f.band + 1,
                "mean": f.mean,
                "bandwidth": f.bandwidth,
                "near": if f.mean < midpoint { "VBM" } else { "CBM" },
            })
        })
        .collect();
    Ok(json!({ "svg": svg, "gap": edges.gap, "vbm": edges.vbm, "cbm": edges.cbm, "flat": flat }).to_string())
}

#[wasm_bindgen(js_name = stackingView)]
pub fn stacking_view_js(stacking: &str) -> Result<String, JsValue> {
    stacking_view(stacking).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = tbBands)]
pub fn tb_bands_js(stacking: &str, a: f64, c: f64, points: usize) -> Result<String, JsValue> {
    tb_bands(stacking, a, c, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = defectDos)]
pub fn defect_dos_js(name: &str, sigma: f64) -> Result<String, JsValue> {
    defect_dos(name, sigma).map_err(|e| JsValue::from_str(&e))
}
