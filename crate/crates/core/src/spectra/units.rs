//! Energy unit conversions.

use super::{Result, SpectraError};

/// hc in eV·μm.
pub const HC_EV_UM: f64 = 1.239_841_93;

/// Rydberg energy in eV (CODATA 2018).
pub const RY_TO_EV: f64 = 13.605_693_122_994;

/// Photon wavelength (μm) for an energy in eV.
pub fn ev_to_wavelength(energy_ev: f64) -> Result<f64> {
    if !(energy_ev > 0.0) {
        return Err(SpectraError::NonPositiveEnergy(energy_ev));
    }
    Ok(HC_EV_UM / energy_ev)
}

/// Photon energy (eV) for a wavelength in μm.
pub fn wavelength_to_ev(wavelength_um: f64) -> Result<f64> {
    if !(wavelength_um > 0.0) {
        return Err(SpectraError::NonPositiveEnergy(wavelength_um));
    }
    Ok(HC_EV_UM / wavelength_um)
}

pub fn ry_to_ev(ry: f64) -> f64 {
    ry * RY_TO_EV
}
