//! Orthogonal sp3 Slater-Koster tight binding.
//!
//! Orbitals per atom are ordered s, pₓ, p_y, p_z. The Bloch sum runs over
//! bond vectors d = r_j + T − r_i, H_iα,jβ(k) = Σ_T h_αβ(d) e^{ik·d}.

use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::{ModelError, Result};
use crate::bz::{reciprocal_lattice, KPath};
use crate::crystal::CrystalStructure;
use crate::spectra::{EigenvalueSet, KSample};

pub const ORBITALS: usize = 4;

const HERMITIAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Onsite {
    pub s: f64,
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

/// Two-centre integrals for a pair key "A-B". `sp_sigma` couples s on A to
/// p on B; `ps_sigma` couples p on A to s on B and defaults to `sp_sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hopping {
    pub ss_sigma: f64,
    pub sp_sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ps_sigma: Option<f64>,
    pub pp_sigma: f64,
    pub pp_pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TbModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub onsite: BTreeMap<String, Onsite>,
    pub hoppings: BTreeMap<String, Hopping>,
    /// Neighbour cutoff, Å.
    pub cutoff: f64,
    #[serde(default)]
    pub valence_electrons: BTreeMap<String, u32>,
}

/// Integrals oriented from species A (site i) to species B (site j).
struct Oriented {
    ss: f64,
    sp: f64,
    ps: f64,
    pps: f64,
    ppp: f64,
}

impl TbModel {
    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        if !(model.cutoff > 0.0) || !model.cutoff.is_finite() {
            return Err(ModelError::InvalidModel(format!(
                "cutoff must be positive, got {}",
                model.cutoff
            )));
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    fn oriented(&self, a: &str, b: &str) -> Result<Oriented> {
        if let Some(h) = self.hoppings.get(&format!("{a}-{b}")) {
            return Ok(Oriented {
                ss: h.ss_sigma,
                sp: h.sp_sigma,
                ps: h.ps_sigma.unwrap_or(h.sp_sigma),
                pps: h.pp_sigma,
                ppp: h.pp_pi,
            });
        }
        if let Some(h) = self.hoppings.get(&format!("{b}-{a}")) {
            return Ok(Oriented {
                ss: h.ss_sigma,
                sp: h.ps_sigma.unwrap_or(h.sp_sigma),
                ps: h.sp_sigma,
                pps: h.pp_sigma,
                ppp: h.pp_pi,
            });
        }
        Err(ModelError::MissingPair(format!("{a}-{b}")))
    }

    fn onsite_of(&self, species: &str) -> Result<[f64; ORBITALS]> {
        self.onsite
            .get(species)
            .map(|o| [o.s, o.px, o.py, o.pz])
            .ok_or_else(|| ModelError::MissingSpecies(species.to_string()))
    }

    /// Valence electrons of the whole structure.
    pub fn electron_count(&self, structure: &CrystalStructure) -> Result<u32> {
        structure
            .sites
            .iter()
            .map(|s| {
                self.valence_electrons
                    .get(&s.species)
                    .copied()
                    .ok_or_else(|| ModelError::MissingValence(s.species.clone()))
            })
            .sum()
    }
}

fn sk_block(p: &Oriented, d: &Vector3<f64>) -> [[f64; ORBITALS]; ORBITALS] {
    let u = d / d.norm();
    let mut h = [[0.0; ORBITALS]; ORBITALS];
    h[0][0] = p.ss;
    for a in 0..3 {
        h[0][a + 1] = u[a] * p.sp;
        h[a + 1][0] = -u[a] * p.ps;
        for b in 0..3 {
            let delta = if a == b { p.ppp } else { 0.0 };
            h[a + 1][b + 1] = u[a] * u[b] * (p.pps - p.ppp) + delta;
        }
    }
    h
}

struct Bond {
    i: usize,
    j: usize,
    d: Vector3<f64>,
    block: [[f64; ORBITALS]; ORBITALS],
}

/// Onsite diagonal plus every bond within the cutoff, images included.
struct System {
    onsite: Vec<f64>,
    bonds: Vec<Bond>,
    recip: nalgebra::Matrix3<f64>,
}

impl System {
    fn new(structure: &CrystalStructure, model: &TbModel) -> Result<Self> {
        let n = structure.sites.len();
        if n == 0 {
            return Err(ModelError::InvalidModel("structure has no atoms".into()));
        }
        let mut onsite = Vec::with_capacity(ORBITALS * n);
        for s in &structure.sites {
            onsite.extend_from_slice(&model.onsite_of(&s.species)?);
        }
        let recip = reciprocal_lattice(&structure.cell).map_err(|e| ModelError::InvalidModel(e.to_string()))?;
        let lattice_t = structure.cell.matrix().transpose();
        let reach: Vec<i64> = (0..3)
            .map(|r| (model.cutoff * recip.row(r).norm() / std::f64::consts::TAU).ceil() as i64 + 1)
            .collect();
        let mut bonds = Vec::new();
        for i in 0..n {
            let fi = Vector3::from(structure.sites[i].frac);
            for j in 0..n {
                let fj = Vector3::from(structure.sites[j].frac);
                for t0 in -reach[0]..=reach[0] {
                    for t1 in -reach[1]..=reach[1] {
                        for t2 in -reach[2]..=reach[2] {
                            if i == j && (t0, t1, t2) == (0, 0, 0) {
                                continue;
                            }
                            let t = Vector3::new(t0 as f64, t1 as f64, t2 as f64);
                            let d = lattice_t * (fj + t - fi);
                            let dist = d.norm();
                            if dist >= model.cutoff {
                                continue;
                            }
                            if dist < 1e-6 {
                                return Err(ModelError::InvalidModel(format!("sites {i} and {j} overlap")));
                            }
                            let pair = model.oriented(&structure.sites[i].species, &structure.sites[j].species)?;
                            bonds.push(Bond {
                                i,
                                j,
                                block: sk_block(&pair, &d),
                                d,
                            });
                        }
                    }
                }
            }
        }
        Ok(Self { onsite, bonds, recip })
    }

    fn hamiltonian(&self, frac_k: [f64; 3]) -> DMatrix<Complex<f64>> {
        let dim = self.onsite.len();
        let k = self.recip.transpose() * Vector3::from(frac_k);
        let mut h = DMatrix::<Complex<f64>>::zeros(dim, dim);
        for (p, e) in self.onsite.iter().enumerate() {
            h[(p, p)] = Complex::new(*e, 0.0);
        }
        for bond in &self.bonds {
            let phase = k.dot(&bond.d);
            let f = Complex::new(phase.cos(), phase.sin());
            for a in 0..ORBITALS {
                for b in 0..ORBITALS {
                    h[(bond.i * ORBITALS + a, bond.j * ORBITALS + b)] += f * bond.block[a][b];
                }
            }
        }
        h
    }

    fn eigenvalues(&self, k_index: usize, frac_k: [f64; 3]) -> Result<Vec<f64>> {
        let h = self.hamiltonian(frac_k);
        let deviation = (&h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if deviation >= HERMITIAN_TOLERANCE {
            return Err(ModelError::NonHermitian { k_index, deviation });
        }
        let mut e: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        Ok(e)
    }
}

/// Bloch Hamiltonian at a reciprocal-fractional k (of the structure's cell).
pub fn bloch_hamiltonian(
    structure: &CrystalStructure,
    model: &TbModel,
    frac_k: [f64; 3],
) -> Result<DMatrix<Complex<f64>>> {
    Ok(System::new(structure, model)?.hamiltonian(frac_k))
}

/// Ascending eigenvalues at each k, in input order.
pub fn tb_solve_points(structure: &CrystalStructure, model: &TbModel, kpoints: &[[f64; 3]]) -> Result<Vec<Vec<f64>>> {
    let system = System::new(structure, model)?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        kpoints
            .par_iter()
            .enumerate()
            .map(|(i, k)| system.eigenvalues(i + 1, *k))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        kpoints
            .iter()
            .enumerate()
            .map(|(i, k)| system.eigenvalues(i + 1, *k))
            .collect()
    }
}

/// Solves along `path`; the path's fractional coordinates are taken in the
/// reciprocal basis of `structure`'s own cell.
pub fn tb_solve(structure: &CrystalStructure, model: &TbModel, path: &KPath) -> Result<EigenvalueSet> {
    let electrons = model.electron_count(structure)?;
    let fracs: Vec<[f64; 3]> = path.points.iter().map(|p| p.frac).collect();
    let bands = tb_solve_points(structure, model, &fracs)?;
    let w = 1.0 / path.len() as f64;
    let kpoints = path
        .points
        .iter()
        .map(|p| KSample {
            frac: p.frac,
            weight: w,
            s: Some(p.s),
        })
        .collect();
    Ok(EigenvalueSet::new(kpoints, bands, electrons, 2)?)
}
