use serde::Serialize;

use super::{EigenvalueSet, Result, SpectraError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEdges {
    /// Number of occupied bands.
    pub n_occ: usize,
    pub vbm: f64,
    pub cbm: f64,
    /// `cbm − vbm`; non-positive means there is no gap.
    pub gap: f64,
    /// k index (0-based) of the VBM.
    pub vbm_k: usize,
    pub cbm_k: usize,
}

impl BandEdges {
    pub fn has_gap(&self) -> bool {
        self.gap > 0.0
    }
}

/// Integer occupation: `electrons / spin` bands filled.
pub fn occupied_bands(set: &EigenvalueSet) -> Result<usize> {
    let spin = u32::from(set.spin_degeneracy);
    if !set.electrons.is_multiple_of(spin) {
        return Err(SpectraError::FractionalOccupation {
            electrons: set.electrons,
            spin: set.spin_degeneracy,
        });
    }
    let n_occ = (set.electrons / spin) as usize;
    if n_occ == 0 {
        return Err(SpectraError::NoOccupied);
    }
    if n_occ >= set.nbands() {
        return Err(SpectraError::NoCbm(set.nbands()));
    }
    Ok(n_occ)
}

/// VBM = max over k of the highest occupied band, CBM = min over k of the
/// lowest unoccupied band. Ties keep the first k index.
pub fn find_band_edges(set: &EigenvalueSet) -> Result<BandEdges> {
    let n_occ = occupied_bands(set)?;
    let (mut vbm, mut vbm_k) = (f64::NEG_INFINITY, 0);
    let (mut cbm, mut cbm_k) = (f64::INFINITY, 0);
    for (k, row) in set.bands.iter().enumerate() {
        if row[n_occ - 1] > vbm {
            vbm = row[n_occ - 1];
            vbm_k = k;
        }
        if row[n_occ] < cbm {
            cbm = row[n_occ];
            cbm_k = k;
        }
    }
    Ok(BandEdges {
        n_occ,
        vbm,
        cbm,
        gap: cbm - vbm,
        vbm_k,
        cbm_k,
    })
}

/// Shifts the set so its VBM sits at exactly zero.
pub fn normalize_to_vbm(set: &EigenvalueSet) -> Result<EigenvalueSet> {
    let edges = find_band_edges(set)?;
    let mut out = set.clone();
    for row in &mut out.bands {
        for e in row.iter_mut() {
            *e -= edges.vbm;
        }
    }
    out.reference = Some("valence band maximum = 0".into());
    Ok(out)
}

/// Gap between the highest occupied and lowest unoccupied state of the full
/// spectrum (host bands and defect levels together).
pub fn defect_gap(set: &EigenvalueSet) -> Result<f64> {
    Ok(find_band_edges(set)?.gap)
}
