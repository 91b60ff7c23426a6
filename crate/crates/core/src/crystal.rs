//! Hexagonal polytypes built from close-packed stacking sequences.
//!
//! A polytype with `n` stacking letters has one Si-C bilayer per letter. The
//! lateral position of a layer is fixed by its letter and the carbon sits
//! directly above its silicon at the ideal tetrahedral offset `3/(4n)` along
//! `c`. Layers are classified hexagonal (h) when both cyclic neighbours carry
//! the same letter, quasi-cubic (k) otherwise.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::numfmt::{round_frac, round_sig};

/// Default in-plane lattice constant of 4H-SiC (mp-11714), Å.
pub const DEFAULT_A: f64 = 3.09;
/// Default c-axis lattice constant of 4H-SiC (mp-11714), Å.
pub const DEFAULT_C: f64 = 10.08;

#[derive(Debug, Error)]
pub enum CrystalError {
    #[error("stacking sequence needs at least 2 layers, got {0}")]
    StackingTooShort(usize),
    #[error("invalid stacking letter '{letter}' at index {index}")]
    InvalidLetter { letter: char, index: usize },
    #[error("stacking letters at index {index} and {next} are equal (cyclic close-packing violated)")]
    AdjacentDuplicate { index: usize, next: usize },
    #[error("lattice constants must be positive (a = {a}, c = {c})")]
    NonPositiveLattice { a: f64, c: f64 },
    #[error("lattice vectors are degenerate (volume {0})")]
    DegenerateCell(f64),
    #[error("structure has no stacking provenance; sites cannot be classified")]
    Unclassifiable,
    #[error("site index {index} out of range for {len} sites")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("degenerate distance query: site {0} with itself (distance 0)")]
    DegenerateQuery(usize),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid structure: {0}")]
    Invalid(String),
    #[error("unknown chemical species '{0}'")]
    UnknownSpecies(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = CrystalError> = std::result::Result<T, E>;

/// Close-packed lateral position of a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    A,
    B,
    C,
}

impl Layer {
    /// Fractional (x, y) of the layer's lateral site.
    pub fn lateral(self) -> [f64; 2] {
        match self {
            Layer::A => [0.0, 0.0],
            Layer::B => [1.0 / 3.0, 2.0 / 3.0],
            Layer::C => [2.0 / 3.0, 1.0 / 3.0],
        }
    }

    pub fn letter(self) -> char {
        match self {
            Layer::A => 'A',
            Layer::B => 'B',
            Layer::C => 'C',
        }
    }
}

/// Ordered stacking letters; cyclically adjacent letters differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackingSequence(Vec<Layer>);

impl StackingSequence {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        let n = layers.len();
        if n < 2 {
            return Err(CrystalError::StackingTooShort(n));
        }
        for i in 0..n {
            let next = (i + 1) % n;
            if layers[i] == layers[next] {
                return Err(CrystalError::AdjacentDuplicate { index: i, next });
            }
        }
        Ok(Self(layers))
    }

    pub fn layers(&self) -> &[Layer] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Class of layer `i` under the cyclic neighbour rule.
    pub fn layer_class(&self, i: usize) -> SiteClass {
        let n = self.0.len();
        let below = self.0[(i + n - 1) % n];
        let above = self.0[(i + 1) % n];
        if below == above {
            SiteClass::H
        } else {
            SiteClass::K
        }
    }

    /// The sequence repeated `times` times along c.
    pub fn repeated(&self, times: usize) -> Self {
        let mut layers = Vec::with_capacity(self.0.len() * times);
        for _ in 0..times {
            layers.extend_from_slice(&self.0);
        }
        Self(layers)
    }
}

impl FromStr for StackingSequence {
    type Err = CrystalError;

    fn from_str(s: &str) -> Result<Self> {
        let layers = s
            .trim()
            .chars()
            .enumerate()
            .map(|(index, letter)| match letter.to_ascii_uppercase() {
                'A' => Ok(Layer::A),
                'B' => Ok(Layer::B),
                'C' => Ok(Layer::C),
                _ => Err(CrystalError::InvalidLetter { letter, index }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }
}

impl fmt::Display for StackingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for layer in &self.0 {
            write!(f, "{}", layer.letter())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SiteClass {
    H,
    K,
    Unclassified,
}

impl fmt::Display for SiteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SiteClass::H => "h",
            SiteClass::K => "k",
            SiteClass::Unclassified => "unclassified",
        })
    }
}

/// Periodic cell. Rows of `vectors` are the Cartesian lattice vectors in Å.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeCell {
    pub a: f64,
    pub c: f64,
    pub vectors: [[f64; 3]; 3],
}

impl LatticeCell {
    /// Hexagonal cell with a₁ = (a,0,0), a₂ = (−a/2, a√3/2, 0), a₃ = (0,0,c).
    pub fn hexagonal(a: f64, c: f64) -> Result<Self> {
        if !(a > 0.0 && c > 0.0) {
            return Err(CrystalError::NonPositiveLattice { a, c });
        }
        let h = a * 3f64.sqrt() / 2.0;
        Ok(Self {
            a,
            c,
            vectors: [[a, 0.0, 0.0], [-a / 2.0, h, 0.0], [0.0, 0.0, c]],
        })
    }

    /// Arbitrary cell; `a` and `c` are taken as |a₁| and |a₃|.
    pub fn from_vectors(vectors: [[f64; 3]; 3]) -> Result<Self> {
        let m = Matrix3::from_row_slice(&vectors.concat());
        let vol = m.determinant();
        let scale = vectors.iter().map(|v| Vector3::from(*v).norm()).product::<f64>();
        if !(vol.abs() > 1e-10 * scale) || !vol.is_finite() {
            return Err(CrystalError::DegenerateCell(vol));
        }
        Ok(Self {
            a: Vector3::from(vectors[0]).norm(),
            c: Vector3::from(vectors[2]).norm(),
            vectors,
        })
    }

    /// Lattice vectors as matrix rows.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_row_slice(&self.vectors.concat())
    }

    pub fn volume(&self) -> f64 {
        self.matrix().determinant().abs()
    }

    pub fn to_cartesian(&self, frac: [f64; 3]) -> Vector3<f64> {
        self.matrix().transpose() * Vector3::from(frac)
    }

    /// Cell with each lattice vector scaled by its multiplier.
    pub fn scaled(&self, n: [usize; 3]) -> Self {
        let mut vectors = self.vectors;
        for (row, &k) in vectors.iter_mut().zip(n.iter()) {
            for x in row.iter_mut() {
                *x *= k as f64;
            }
        }
        Self {
            a: self.a * n[0] as f64,
            c: self.c * n[2] as f64,
            vectors,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomSite {
    pub species: String,
    pub frac: [f64; 3],
    pub layer: usize,
    pub site_class: SiteClass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalStructure {
    pub cell: LatticeCell,
    pub sites: Vec<AtomSite>,
    pub stacking: Option<StackingSequence>,
}

/// Wraps a fractional coordinate into `[0, 1)`.
pub fn wrap_frac(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Builds the ideal polytype for `stacking`; sites come out unclassified.
pub fn build_polytype(stacking: &StackingSequence, a: f64, c: f64) -> Result<CrystalStructure> {
    let cell = LatticeCell::hexagonal(a, c)?;
    let n = stacking.len() as f64;
    let mut sites = Vec::with_capacity(2 * stacking.len());
    for (i, layer) in stacking.layers().iter().enumerate() {
        let [x, y] = layer.lateral();
        let z = i as f64 / n;
        sites.push(AtomSite {
            species: "Si".into(),
            frac: [x, y, z],
            layer: i,
            site_class: SiteClass::Unclassified,
        });
        sites.push(AtomSite {
            species: "C".into(),
            frac: [x, y, z + 3.0 / (4.0 * n)],
            layer: i,
            site_class: SiteClass::Unclassified,
        });
    }
    Ok(CrystalStructure {
        cell,
        sites,
        stacking: Some(stacking.clone()),
    })
}

/// Assigns h/k classes from the stacking provenance.
pub fn classify_sites(structure: &CrystalStructure) -> Result<CrystalStructure> {
    let stacking = structure.stacking.as_ref().ok_or(CrystalError::Unclassifiable)?;
    let mut out = structure.clone();
    for site in &mut out.sites {
        if site.layer >= stacking.len() {
            return Err(CrystalError::Invalid(format!(
                "site layer {} exceeds stacking length {}",
                site.layer,
                stacking.len()
            )));
        }
        site.site_class = stacking.layer_class(site.layer);
    }
    Ok(out)
}

/// [`build_polytype`] followed by [`classify_sites`].
pub fn polytype(stacking: &StackingSequence, a: f64, c: f64) -> Result<CrystalStructure> {
    classify_sites(&build_polytype(stacking, a, c)?)
}

impl CrystalStructure {
    pub fn cartesian(&self, i: usize) -> Vector3<f64> {
        self.cell.to_cartesian(self.sites[i].frac)
    }

    pub fn count_species(&self, species: &str) -> usize {
        self.sites.iter().filter(|s| s.species == species).count()
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.sites.len() {
            Err(CrystalError::IndexOutOfRange {
                index,
                len: self.sites.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Shortest Cartesian vector from site `i` to any periodic image of `j`.
    pub fn min_image_vector(&self, i: usize, j: usize) -> Result<Vector3<f64>> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(min_image(&self.cell, self.sites[i].frac, self.sites[j].frac))
    }

    /// Minimum-image distance between two distinct sites, Å.
    pub fn interatomic_distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(CrystalError::DegenerateQuery(i));
        }
        Ok(self.min_image_vector(i, j)?.norm())
    }

    /// Smallest minimum-image distance over all pairs, also counting a
    /// site's own periodic images (relevant for tiny cells).
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        let m = self.cell.matrix().transpose();
        for i in 0..self.sites.len() {
            for j in i..self.sites.len() {
                let d = if i == j {
                    let mut self_best = f64::INFINITY;
                    for t in image_offsets() {
                        if t != [0, 0, 0] {
                            let v = m * Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64);
                            self_best = self_best.min(v.norm());
                        }
                    }
                    self_best
                } else {
                    min_image(&self.cell, self.sites[i].frac, self.sites[j].frac).norm()
                };
                best = best.min(d);
            }
        }
        best
    }

    /// Checks species symbols, fractional ranges and layer bookkeeping.
    pub fn validate(&self) -> Result<()> {
        for (idx, site) in self.sites.iter().enumerate() {
            if !is_known_species(&site.species) {
                return Err(CrystalError::UnknownSpecies(site.species.clone()));
            }
            if let Some(bad) = site.frac.iter().find(|x| !(0.0..1.0).contains(*x)) {
                return Err(CrystalError::Invalid(format!(
                    "site {idx}: fractional component {bad} outside [0, 1)"
                )));
            }
            if let Some(st) = &self.stacking {
                if site.layer >= st.len() {
                    return Err(CrystalError::Invalid(format!(
                        "site {idx}: layer {} outside stacking of length {}",
                        site.layer,
                        st.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

fn image_offsets() -> impl Iterator<Item = [i32; 3]> {
    (-1..=1).flat_map(|a| (-1..=1).flat_map(move |b| (-1..=1).map(move |c| [a, b, c])))
}

/// Minimum-image displacement from `fi` to `fj` (both fractional).
pub fn min_image(cell: &LatticeCell, fi: [f64; 3], fj: [f64; 3]) -> Vector3<f64> {
    let m = cell.matrix().transpose();
    let mut d = Vector3::from(fj) - Vector3::from(fi);
    for x in d.iter_mut() {
        *x -= x.round();
    }
    let mut best = m * d;
    let mut best_norm = best.norm_squared();
    for t in image_offsets() {
        if t == [0, 0, 0] {
            continue;
        }
        let v = m * (d + Vector3::new(t[0] as f64, t[1] as f64, t[2] as f64));
        let n = v.norm_squared();
        if n < best_norm {
            best = v;
            best_norm = n;
        }
    }
    best
}

const ELEMENTS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",
    "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce",
    "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir",
    "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc",
    "Lv", "Ts", "Og",
];

pub fn is_known_species(symbol: &str) -> bool {
    ELEMENTS.contains(&symbol)
}

// ---------------------------------------------------------------------------
// Structure file (JSON syntax)

#[derive(Serialize, Deserialize)]
struct CellRecord {
    a: f64,
    c: f64,
    vectors: [[f64; 3]; 3],
}

#[derive(Serialize, Deserialize)]
struct SiteRecord {
    species: String,
    frac: [f64; 3],
    layer: usize,
    site_class: SiteClass,
}

#[derive(Serialize, Deserialize)]
struct StructureRecord {
    cell: CellRecord,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    stacking: Option<String>,
    sites: Vec<SiteRecord>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

/// A structure file: the base schema plus any extra top-level objects
/// (`"supercell"`, `"defect"`) owned by other modules.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureDocument {
    pub structure: CrystalStructure,
    pub extra: Map<String, Value>,
}

impl From<CrystalStructure> for StructureDocument {
    fn from(structure: CrystalStructure) -> Self {
        Self {
            structure,
            extra: Map::new(),
        }
    }
}

/// Serializes a structure document; floats carry 12 significant digits.
pub fn structure_to_json(doc: &StructureDocument) -> String {
    let s = &doc.structure;
    let record = StructureRecord {
        cell: CellRecord {
            a: round_sig(s.cell.a),
            c: round_sig(s.cell.c),
            vectors: s.cell.vectors.map(|row| row.map(round_sig)),
        },
        stacking: s.stacking.as_ref().map(|st| st.to_string()),
        sites: s
            .sites
            .iter()
            .map(|site| SiteRecord {
                species: site.species.clone(),
                frac: site.frac.map(round_frac),
                layer: site.layer,
                site_class: site.site_class,
            })
            .collect(),
        extra: doc.extra.clone(),
    };
    let mut text = serde_json::to_string_pretty(&record).expect("structure record serializes");
    text.push('\n');
    text
}

pub fn structure_from_json(text: &str) -> Result<StructureDocument> {
    let record: StructureRecord = serde_json::from_str(text).map_err(|e| CrystalError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let stacking = record.stacking.as_deref().map(StackingSequence::from_str).transpose()?;
    let mut cell = LatticeCell::from_vectors(record.cell.vectors)?;
    if !(record.cell.a > 0.0 && record.cell.c > 0.0) {
        return Err(CrystalError::NonPositiveLattice {
            a: record.cell.a,
            c: record.cell.c,
        });
    }
    cell.a = record.cell.a;
    cell.c = record.cell.c;
    let structure = CrystalStructure {
        cell,
        sites: record
            .sites
            .into_iter()
            .map(|r| AtomSite {
                species: r.species,
                frac: r.frac,
                layer: r.layer,
                site_class: r.site_class,
            })
            .collect(),
        stacking,
    };
    structure.validate()?;
    Ok(StructureDocument {
        structure,
        extra: record.extra,
    })
}

pub fn write_structure(structure: &CrystalStructure, path: impl AsRef<Path>) -> Result<()> {
    write_document(&StructureDocument::from(structure.clone()), path)
}

pub fn write_document(doc: &StructureDocument, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, structure_to_json(doc)).map_err(|source| CrystalError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_document(path: impl AsRef<Path>) -> Result<StructureDocument> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CrystalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    structure_from_json(&text)
}

pub fn read_structure(path: impl AsRef<Path>) -> Result<CrystalStructure> {
    Ok(read_document(path)?.structure)
}

/// Extended-XYZ export; the comment line carries the 9 cell components.
pub fn write_extxyz<W: Write>(structure: &CrystalStructure, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", structure.sites.len())?;
    let lattice: Vec<String> = structure
        .cell
        .vectors
        .iter()
        .flatten()
        .map(|x| format!("{:.8}", x))
        .collect();
    writeln!(
        out,
        "Lattice=\"{}\" Properties=species:S:1:pos:R:3:site_class:S:1 pbc=\"T T T\"",
        lattice.join(" ")
    )?;
    for (i, site) in structure.sites.iter().enumerate() {
        let r = structure.cartesian(i);
        writeln!(
            out,
            "{:<2} {:>14.8} {:>14.8} {:>14.8} {}",
            site.species, r.x, r.y, r.z, site.site_class
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sic() -> CrystalStructure {
        polytype(&"ABCB".parse().unwrap(), DEFAULT_A, DEFAULT_C).unwrap()
    }

    #[test]
    fn four_h_has_four_si_four_c() {
        let s = sic();
        assert_eq!(s.sites.len(), 8);
        assert_eq!(s.count_species("Si"), 4);
        assert_eq!(s.count_species("C"), 4);
    }

    #[test]
    fn four_h_classes_alternate() {
        let s = sic();
        let classes: Vec<SiteClass> = s
            .sites
            .iter()
            .filter(|x| x.species == "Si")
            .map(|x| x.site_class)
            .collect();
        assert_eq!(classes, [SiteClass::H, SiteClass::K, SiteClass::H, SiteClass::K]);
        // Si and C of a layer share the class
        for pair in s.sites.chunks(2) {
            assert_eq!(pair[0].site_class, pair[1].site_class);
        }
    }

    #[test]
    fn wurtzite_and_cubic_limits() {
        let two_h = polytype(&"AB".parse().unwrap(), 3.0, 5.0).unwrap();
        assert_eq!(two_h.sites.len(), 4);
        assert!(two_h.sites.iter().all(|s| s.site_class == SiteClass::H));
        let si_z: Vec<f64> = two_h
            .sites
            .iter()
            .filter(|s| s.species == "Si")
            .map(|s| s.frac[2])
            .collect();
        assert_eq!(si_z, [0.0, 0.5]);

        let three_c = polytype(&"ABC".parse().unwrap(), 3.0, 7.5).unwrap();
        assert!(three_c.sites.iter().all(|s| s.site_class == SiteClass::K));
        let c_z: Vec<f64> = three_c
            .sites
            .iter()
            .filter(|s| s.species == "C")
            .map(|s| s.frac[2])
            .collect();
        for (got, want) in c_z.iter().zip([0.25, 7.0 / 12.0, 11.0 / 12.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_stackings() {
        assert!(matches!(
            "ABBC".parse::<StackingSequence>(),
            Err(CrystalError::AdjacentDuplicate { index: 1, next: 2 })
        ));
        // cyclic wrap: last == first
        assert!(matches!(
            "ABCA".parse::<StackingSequence>(),
            Err(CrystalError::AdjacentDuplicate { index: 3, next: 0 })
        ));
        assert!(matches!(
            "A".parse::<StackingSequence>(),
            Err(CrystalError::StackingTooShort(1))
        ));
        assert!(matches!(
            "ABX".parse::<StackingSequence>(),
            Err(CrystalError::InvalidLetter { letter: 'X', index: 2 })
        ));
    }

    #[test]
    fn classification_needs_provenance() {
        let mut s = build_polytype(&"ABCB".parse().unwrap(), 3.09, 10.08).unwrap();
        s.stacking = None;
        assert!(matches!(classify_sites(&s), Err(CrystalError::Unclassifiable)));
    }

    #[test]
    fn axial_bond_is_three_sixteenths_c() {
        let s = sic();
        // site 0 = Si layer 0, site 1 = C layer 0
        let d = s.interatomic_distance(0, 1).unwrap();
        assert!((d - 3.0 / 16.0 * 10.08).abs() < 1e-12);
        assert!((d - 1.89).abs() < 1e-12);
        assert!(matches!(
            s.interatomic_distance(3, 3),
            Err(CrystalError::DegenerateQuery(3))
        ));
        assert_eq!(s.min_image_vector(3, 3).unwrap().norm(), 0.0);
        assert!(s.interatomic_distance(0, 99).is_err());
    }

    #[test]
    fn cell_volume_matches_closed_form() {
        let cell = LatticeCell::hexagonal(3.09, 10.08).unwrap();
        let want = 3f64.sqrt() / 2.0 * 3.09 * 3.09 * 10.08;
        assert!((cell.volume() - want).abs() / want < 1e-12);
        assert!(LatticeCell::hexagonal(0.0, 1.0).is_err());
        assert!(LatticeCell::from_vectors([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let s = sic();
        let text = structure_to_json(&s.clone().into());
        let back = structure_from_json(&text).unwrap();
        assert_eq!(structure_to_json(&back), text);
        assert_eq!(back.structure.sites.len(), 8);

        let bad = text.replacen("\"frac\": [\n        0.0", "\"frac\": [\n        1.2", 1);
        assert_ne!(bad, text);
        assert!(matches!(structure_from_json(&bad), Err(CrystalError::Invalid(_))));

        let truncated = &text[..text.len() / 2];
        match structure_from_json(truncated) {
            Err(CrystalError::Parse { line, .. }) => assert!(line > 1),
            other => panic!("expected parse error, got {other:?}"),
        }

        let alien = text.replacen("\"Si\"", "\"Xx\"", 1);
        assert!(matches!(
            structure_from_json(&alien),
            Err(CrystalError::UnknownSpecies(s)) if s == "Xx"
        ));
    }

    #[test]
    fn extxyz_header_carries_cell() {
        let mut buf = Vec::new();
        write_extxyz(&sic(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("8"));
        let header = lines.next().unwrap();
        let lattice = header.split('"').nth(1).unwrap();
        assert_eq!(lattice.split_whitespace().count(), 9);
        assert_eq!(text.lines().count(), 10);
    }
}
