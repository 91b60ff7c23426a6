//! Workflow toolkit for point defects in hexagonal SiC polytypes.
//!
//! The pipeline runs from close-packed stacking sequences to defect
//! supercells, Brillouin-zone paths, eigenvalue datasets (ingested from an
//! external plane-wave code or generated by the bundled model engines),
//! band/DOS/defect-state analysis, SCF convergence auditing and relative
//! formation energies.
//!
//! ```
//! use polydef::crystal::{polytype, StackingSequence};
//!
//! let stacking: StackingSequence = "ABCB".parse().unwrap();
//! let sic = polytype(&stacking, 3.09, 10.08).unwrap();
//! assert_eq!(sic.sites.len(), 8);
//! ```

pub mod bz;
#[cfg(feature = "cli")]
pub mod cli;
pub mod crystal;
pub mod deck;
pub mod defects;
pub mod energetics;
pub mod fixtures;
pub mod modelbands;
pub mod numfmt;
pub mod plot;
pub mod spectra;

pub use bz::{build_kpath, KPath, KPoint};
pub use crystal::{CrystalStructure, LatticeCell, SiteClass, StackingSequence};
pub use defects::{DefectConfiguration, DefectedStructure, Supercell};
pub use energetics::EnergyLedger;
pub use spectra::EigenvalueSet;
