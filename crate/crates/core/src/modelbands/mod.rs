//! Band engines that stand in for an external plane-wave code: analytic
//! synthetic spectra with closed-form edges, and an orthogonal sp3
//! Slater-Koster tight-binding solver.

mod synthetic;
mod tb;

pub use synthetic::{synthesize, BandTerm, DefectLevel, SyntheticBandSpec, MODE_DIRECTIONS};
pub use tb::{bloch_hamiltonian, tb_solve, tb_solve_points, Hopping, Onsite, TbModel, ORBITALS};

use thiserror::Error;

use crate::spectra::SpectraError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("{electrons} electrons exceed the {capacity} available states")]
    TooManyElectrons { electrons: u32, capacity: usize },
    #[error("no onsite parameters for species '{0}'")]
    MissingSpecies(String),
    #[error("no hopping parameters for pair '{0}' (needed within the cutoff)")]
    MissingPair(String),
    #[error("no valence electron count for species '{0}'")]
    MissingValence(String),
    #[error("invalid tight-binding model: {0}")]
    InvalidModel(String),
    #[error("Hamiltonian is not Hermitian at k index {k_index}: max |H - H^H| = {deviation:e}")]
    NonHermitian { k_index: usize, deviation: f64 },
    #[error("malformed model file: {0}")]
    Parse(String),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
