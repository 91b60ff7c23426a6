//! Engine-agnostic input deck for the external SCF → NSCF calculation.
//!
//! One `key = value  # unit` line per setting, then the structure and the
//! NSCF k-point block. Mapping to common plane-wave codes:
//! `scf_tolerance` ↔ conv_thr / EDIFF-style energy threshold,
//! `max_iterations` ↔ electron_maxstep / NELM, `hubbard_u` ↔ Hubbard U on
//! the f shell of `hubbard_species`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bz::KPath;
use crate::crystal::CrystalStructure;
use crate::numfmt::fmt_num;

#[derive(Debug, Error)]
pub enum DeckError {
    #[error("invalid deck settings: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeckSettings {
    /// Ry.
    pub scf_tolerance: f64,
    pub max_iterations: usize,
    /// eV; recorded only, no U physics is applied here.
    pub hubbard_u: f64,
    pub hubbard_species: String,
    pub scf_kpoints: usize,
    /// Reciprocal fractional coordinates of the SCF k-points; left unset
    /// unless given explicitly.
    pub scf_kpoint_list: Option<Vec<[f64; 3]>>,
    pub nscf_kpoints: usize,
    pub functional: String,
}

impl Default for DeckSettings {
    fn default() -> Self {
        Self {
            scf_tolerance: 1e-4,
            max_iterations: 100,
            hubbard_u: 7.21,
            hubbard_species: "Er".into(),
            scf_kpoints: 2,
            scf_kpoint_list: None,
            nscf_kpoints: 113,
            functional: "PBE-GGA+U".into(),
        }
    }
}

impl DeckSettings {
    pub fn validate(&self) -> Result<(), DeckError> {
        let bad = |m: String| Err(DeckError::Invalid(m));
        if !(self.scf_tolerance > 0.0) || !self.scf_tolerance.is_finite() {
            return bad(format!("scf_tolerance must be positive, got {}", self.scf_tolerance));
        }
        if self.max_iterations < 1 {
            return bad("max_iterations must be at least 1".into());
        }
        if self.scf_kpoints < 1 || self.nscf_kpoints < 2 {
            return bad("need at least 1 SCF and 2 NSCF k-points".into());
        }
        if let Some(list) = &self.scf_kpoint_list {
            if list.len() != self.scf_kpoints {
                return bad(format!(
                    "scf_kpoint_list has {} points but scf_kpoints = {}",
                    list.len(),
                    self.scf_kpoints
                ));
            }
        }
        if !self.hubbard_u.is_finite() || self.hubbard_u < 0.0 {
            return bad(format!("hubbard_u must be >= 0, got {}", self.hubbard_u));
        }
        Ok(())
    }
}

fn line(out: &mut String, key: &str, value: impl std::fmt::Display, unit: &str) {
    let _ = writeln!(out, "{key} = {value}  # {unit}");
}

/// Renders the deck. `path` must hold exactly `nscf_kpoints` points.
pub fn emit_deck(settings: &DeckSettings, structure: &CrystalStructure, path: &KPath) -> Result<String, DeckError> {
    settings.validate()?;
    if path.len() != settings.nscf_kpoints {
        return Err(DeckError::Invalid(format!(
            "k-path has {} points but nscf_kpoints = {}",
            path.len(),
            settings.nscf_kpoints
        )));
    }
    let mut out =
        String::from("# polydef input deck: SCF ground-state density, then NSCF eigenvalues along the path\n");
    line(&mut out, "calculation_sequence", "scf,nscf", "stages");
    line(&mut out, "functional", &settings.functional, "exchange-correlation tag");
    line(&mut out, "hubbard_u", fmt_num(settings.hubbard_u), "eV");
    line(
        &mut out,
        "hubbard_species",
        &settings.hubbard_species,
        "species carrying U (f shell)",
    );
    line(&mut out, "scf_tolerance", fmt_num(settings.scf_tolerance), "Ry");
    line(&mut out, "max_iterations", settings.max_iterations, "count");
    line(&mut out, "scf_kpoints", settings.scf_kpoints, "count");
    match &settings.scf_kpoint_list {
        Some(list) => {
            let coords: Vec<String> = list
                .iter()
                .map(|k| format!("{} {} {}", fmt_num(k[0]), fmt_num(k[1]), fmt_num(k[2])))
                .collect();
            line(&mut out, "scf_kpoint_list", coords.join(" ; "), "reciprocal fractional");
        }
        None => line(
            &mut out,
            "scf_kpoint_list",
            "unset",
            "user must supply the SCF k-points",
        ),
    }
    line(&mut out, "nscf_kpoints", settings.nscf_kpoints, "count");
    line(
        &mut out,
        "nscf_path",
        path.vertices.join("-"),
        "high-symmetry labels, G = Gamma",
    );
    line(&mut out, "atoms", structure.sites.len(), "count");

    out.push_str("\nbegin cell  # angstrom, rows a1 a2 a3\n");
    for v in &structure.cell.vectors {
        let _ = writeln!(out, "  {} {} {}", fmt_num(v[0]), fmt_num(v[1]), fmt_num(v[2]));
    }
    out.push_str("end cell\n\nbegin positions  # species, fractional\n");
    for s in &structure.sites {
        let _ = writeln!(
            out,
            "  {} {} {} {}",
            s.species,
            fmt_num(s.frac[0]),
            fmt_num(s.frac[1]),
            fmt_num(s.frac[2])
        );
    }
    out.push_str("end positions\n\nbegin nscf_kpoints  # reciprocal fractional, weight\n");
    let w = 1.0 / path.len() as f64;
    for p in &path.points {
        let _ = writeln!(
            out,
            "  {} {} {} {}",
            fmt_num(p.frac[0]),
            fmt_num(p.frac[1]),
            fmt_num(p.frac[2]),
            fmt_num(w)
        );
    }
    out.push_str("end nscf_kpoints\n");
    Ok(out)
}
