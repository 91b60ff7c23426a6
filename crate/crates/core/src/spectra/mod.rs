//! Eigenvalue datasets and the analyses run on them: band edges, VBM
//! normalization, smeared DOS, flat (defect-induced) band detection,
//! photon-energy conversion and SCF convergence auditing.

mod convergence;
mod dos;
mod edges;
mod eigio;
mod flat;
pub mod units;

pub use convergence::{audit_convergence, parse_convergence_log, ConvergenceReport, ScfStep};
pub use dos::{compute_dos, compute_dos_with, trapezoid, DosCurve, DosParams, Kernel};
pub use edges::{defect_gap, find_band_edges, normalize_to_vbm, BandEdges};
pub use eigio::{parse_eigenvalues, read_eigenvalues, write_eigenvalues};
pub use flat::{detect_flat_bands, FlatBand};
pub use units::{ev_to_wavelength, wavelength_to_ev, RY_TO_EV};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("structural error at k index {k_index}: {message}")]
    Structure { k_index: usize, message: String },
    #[error("invalid eigenvalue set: {0}")]
    Invalid(String),
    #[error("{electrons} electrons with spin degeneracy {spin} gives fractional occupation")]
    FractionalOccupation { electrons: u32, spin: u8 },
    #[error("no occupied bands (electrons = 0)")]
    NoOccupied,
    #[error("all {0} bands are occupied; no conduction band minimum")]
    NoCbm(usize),
    #[error("smearing width must be positive, got {0}")]
    BadSigma(f64),
    #[error("invalid DOS grid: {0}")]
    BadGrid(String),
    #[error("flat-band threshold must be positive, got {0}")]
    BadDelta(f64),
    #[error("empty energy window [{0}, {1}]")]
    EmptyWindow(f64, f64),
    #[error("energy must be positive, got {0}")]
    NonPositiveEnergy(f64),
    #[error("empty convergence log")]
    EmptyLog,
    #[error("convergence log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = SpectraError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSample {
    pub frac: [f64; 3],
    pub weight: f64,
    /// Cumulative path distance (Å⁻¹) when the set comes from a k-path.
    pub s: Option<f64>,
}

/// Eigenvalues on a set of k-points, ascending at every k.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueSet {
    pub kpoints: Vec<KSample>,
    /// `bands[k][n]`, eV.
    pub bands: Vec<Vec<f64>>,
    pub electrons: u32,
    pub spin_degeneracy: u8,
    /// Free-text note on the energy zero.
    pub reference: Option<String>,
    /// Non-fatal notes collected while building or parsing the set.
    pub warnings: Vec<String>,
}

impl EigenvalueSet {
    /// Builds a set, sorting each k's eigenvalues and recording a warning
    /// when any needed sorting.
    pub fn new(kpoints: Vec<KSample>, mut bands: Vec<Vec<f64>>, electrons: u32, spin_degeneracy: u8) -> Result<Self> {
        let mut warnings = Vec::new();
        for (k, row) in bands.iter_mut().enumerate() {
            if row.windows(2).any(|w| w[0] > w[1]) {
                row.sort_by(f64::total_cmp);
                warnings.push(format!("eigenvalues at k index {} were unsorted; sorted", k + 1));
            }
        }
        let set = Self {
            kpoints,
            bands,
            electrons,
            spin_degeneracy,
            reference: None,
            warnings,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn nk(&self) -> usize {
        self.kpoints.len()
    }

    pub fn nbands(&self) -> usize {
        self.bands.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kpoints.is_empty() {
            return Err(SpectraError::Invalid("no k-points".into()));
        }
        if self.kpoints.len() != self.bands.len() {
            return Err(SpectraError::Invalid(format!(
                "{} k-points but {} eigenvalue rows",
                self.kpoints.len(),
                self.bands.len()
            )));
        }
        if !matches!(self.spin_degeneracy, 1 | 2) {
            return Err(SpectraError::Invalid(format!(
                "spin degeneracy must be 1 or 2, got {}",
                self.spin_degeneracy
            )));
        }
        let nb = self.nbands();
        if nb == 0 {
            return Err(SpectraError::Invalid("no bands".into()));
        }
        for (k, (kp, row)) in self.kpoints.iter().zip(&self.bands).enumerate() {
            if row.len() != nb {
                return Err(SpectraError::Structure {
                    k_index: k + 1,
                    message: format!("{} bands, expected {}", row.len(), nb),
                });
            }
            if !(kp.weight > 0.0) {
                return Err(SpectraError::Structure {
                    k_index: k + 1,
                    message: format!("non-positive weight {}", kp.weight),
                });
            }
            if row.iter().any(|e| !e.is_finite()) {
                return Err(SpectraError::Structure {
                    k_index: k + 1,
                    message: "non-finite eigenvalue".into(),
                });
            }
            if row.windows(2).any(|w| w[0] > w[1]) {
                return Err(SpectraError::Structure {
                    k_index: k + 1,
                    message: "eigenvalues not ascending".into(),
                });
            }
        }
        Ok(())
    }

    pub fn weight_sum(&self) -> f64 {
        self.kpoints.iter().map(|k| k.weight).sum()
    }

    /// Whether the weights sum to one within 1e-9.
    pub fn weights_normalized(&self) -> bool {
        (self.weight_sum() - 1.0).abs() <= 1e-9
    }

    /// Copy with every eigenvalue shifted by `delta` eV.
    pub fn shifted(&self, delta: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.bands {
            for e in row.iter_mut() {
                *e += delta;
            }
        }
        out
    }

    /// Smallest and largest eigenvalue in the set.
    pub fn energy_range(&self) -> (f64, f64) {
        self.bands
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
                (lo.min(e), hi.max(e))
            })
    }

    /// Band `n` across all k.
    pub fn band(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        self.bands.iter().map(move |row| row[n])
    }

    /// Path coordinate for plotting: `s` when present, otherwise the k index.
    pub fn path_coordinates(&self) -> Vec<f64> {
        self.kpoints
            .iter()
            .enumerate()
            .map(|(i, k)| k.s.unwrap_or(i as f64))
            .collect()
    }
}
