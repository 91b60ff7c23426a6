//! Supercell expansion and the four erbium defect configurations.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::crystal::{self, wrap_frac, AtomSite, CrystalError, CrystalStructure, SiteClass, StructureDocument};

/// Distances within this many Å count as equal when breaking ties.
const DISTANCE_TIE: f64 = 1e-6;
/// Relative width of the first-neighbour shell.
const SHELL_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error)]
pub enum DefectError {
    #[error("supercell multipliers must be >= 1, got {0:?}")]
    BadMultiplier([usize; 3]),
    #[error("no {species} site with class {class} in the structure")]
    SiteNotFound { species: String, class: SiteClass },
    #[error("structure already carries a defect ({0})")]
    AlreadyDefected(String),
    #[error("no Er atom present; concentration undefined")]
    NoDopant,
    #[error("vacancy override index {index} is not a C site (found {species})")]
    BadVacancy { index: usize, species: String },
    #[error("unknown defect configuration '{0}' (expected ErH, ErK, ErHV or ErKV)")]
    UnknownKind(String),
    #[error("malformed defect record: {0}")]
    Record(String),
    #[error(transparent)]
    Crystal(#[from] CrystalError),
}

pub type Result<T, E = DefectError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct Supercell {
    pub structure: CrystalStructure,
    pub multipliers: [usize; 3],
    /// For every supercell site, the index of the parent-cell site it images.
    pub parent_index: Vec<usize>,
}

/// Repeats `structure` n1×n2×n3 times. Site order is parent-major, then the
/// image offset (i1, i2, i3) in lexicographic order.
pub fn expand_supercell(structure: &CrystalStructure, n1: usize, n2: usize, n3: usize) -> Result<Supercell> {
    let n = [n1, n2, n3];
    if n.contains(&0) {
        return Err(DefectError::BadMultiplier(n));
    }
    let parent_layers = structure
        .stacking
        .as_ref()
        .map(|s| s.len())
        .unwrap_or_else(|| structure.sites.iter().map(|s| s.layer + 1).max().unwrap_or(0));
    let images = n1 * n2 * n3;
    let mut sites = Vec::with_capacity(structure.sites.len() * images);
    let mut parent_index = Vec::with_capacity(sites.capacity());
    for (p, site) in structure.sites.iter().enumerate() {
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for i3 in 0..n3 {
                    let shift = [i1, i2, i3];
                    let frac = std::array::from_fn(|d| wrap_frac((site.frac[d] + shift[d] as f64) / n[d] as f64));
                    sites.push(AtomSite {
                        species: site.species.clone(),
                        frac,
                        layer: site.layer + i3 * parent_layers,
                        site_class: site.site_class,
                    });
                    parent_index.push(p);
                }
            }
        }
    }
    Ok(Supercell {
        structure: CrystalStructure {
            cell: structure.cell.scaled(n),
            sites,
            stacking: structure.stacking.as_ref().map(|s| s.repeated(n3)),
        },
        multipliers: n,
        parent_index,
    })
}

/// The four configurations: substitutional Er on an h or k silicon site,
/// optionally paired with a vacancy on an adjacent carbon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DefectConfiguration {
    ErH,
    ErK,
    ErHV,
    ErKV,
}

impl DefectConfiguration {
    pub const ALL: [DefectConfiguration; 4] = [Self::ErH, Self::ErK, Self::ErHV, Self::ErKV];

    pub fn site_class(self) -> SiteClass {
        match self {
            Self::ErH | Self::ErHV => SiteClass::H,
            Self::ErK | Self::ErKV => SiteClass::K,
        }
    }

    pub fn has_vacancy(self) -> bool {
        matches!(self, Self::ErHV | Self::ErKV)
    }

    /// Conventional label, e.g. `Er_hV`.
    pub fn label(self) -> &'static str {
        match self {
            Self::ErH => "Er_h",
            Self::ErK => "Er_k",
            Self::ErHV => "Er_hV",
            Self::ErKV => "Er_kV",
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Self::ErH => "ErH",
            Self::ErK => "ErK",
            Self::ErHV => "ErHV",
            Self::ErKV => "ErKV",
        }
    }
}

impl fmt::Display for DefectConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for DefectConfiguration {
    type Err = DefectError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| *c != '_').collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "erh" => Ok(Self::ErH),
            "erk" => Ok(Self::ErK),
            "erhv" => Ok(Self::ErHV),
            "erkv" => Ok(Self::ErKV),
            _ => Err(DefectError::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectedStructure {
    pub structure: CrystalStructure,
    pub config: DefectConfiguration,
    /// Supercell index of the silicon replaced by Er.
    pub substituted_site: usize,
    /// Supercell index of the removed carbon, for vacancy complexes.
    pub removed_site: Option<usize>,
    pub log: Vec<String>,
    /// Atom count of the pristine supercell the defect was placed in.
    pub pristine_atoms: usize,
}

/// Site of `species`/`class` nearest the cell centre; ties go to the lowest index.
pub fn select_site(structure: &CrystalStructure, species: &str, class: SiteClass) -> Result<usize> {
    let centre = structure.cell.to_cartesian([0.5, 0.5, 0.5]);
    let mut best: Option<(usize, f64)> = None;
    for (i, site) in structure.sites.iter().enumerate() {
        if site.species != species || site.site_class != class {
            continue;
        }
        let d = (structure.cartesian(i) - centre).norm();
        match best {
            Some((_, bd)) if d >= bd - DISTANCE_TIE => {}
            _ => best = Some((i, d)),
        }
    }
    best.map(|(i, _)| i).ok_or_else(|| DefectError::SiteNotFound {
        species: species.to_string(),
        class,
    })
}

/// Nearest carbon to `centre` by minimum image. Ties prefer the neighbour
/// best aligned with the c axis, then the lowest index.
pub fn nearest_carbon(structure: &CrystalStructure, centre: usize) -> Option<usize> {
    let c_axis = Vector3::from(structure.cell.vectors[2]).normalize();
    let mut best: Option<(usize, f64, f64)> = None;
    for (j, site) in structure.sites.iter().enumerate() {
        if j == centre || site.species != "C" {
            continue;
        }
        let v = crystal::min_image(&structure.cell, structure.sites[centre].frac, site.frac);
        let d = v.norm();
        let align = (v.dot(&c_axis) / d).abs();
        let better = match best {
            None => true,
            Some((_, bd, ba)) => d < bd - DISTANCE_TIE || ((d - bd).abs() <= DISTANCE_TIE && align > ba + 1e-9),
        };
        if better {
            best = Some((j, d, align));
        }
    }
    best.map(|(j, _, _)| j)
}

/// Carbon sites within the first-neighbour shell around `centre`.
pub fn first_shell_carbons(structure: &CrystalStructure, centre: usize) -> Vec<usize> {
    let dists: Vec<(usize, f64)> = structure
        .sites
        .iter()
        .enumerate()
        .filter(|(j, s)| *j != centre && s.species == "C")
        .map(|(j, s)| {
            (
                j,
                crystal::min_image(&structure.cell, structure.sites[centre].frac, s.frac).norm(),
            )
        })
        .collect();
    let dmin = dists.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min);
    dists
        .into_iter()
        .filter(|(_, d)| *d <= dmin * (1.0 + SHELL_TOLERANCE))
        .map(|(j, _)| j)
        .collect()
}

pub fn apply_defect(supercell: &Supercell, config: DefectConfiguration) -> Result<DefectedStructure> {
    apply_defect_with(supercell, config, None)
}

/// Applies `config`; `vacancy_override` names the carbon to remove instead
/// of the nearest-neighbour choice.
pub fn apply_defect_with(
    supercell: &Supercell,
    config: DefectConfiguration,
    vacancy_override: Option<usize>,
) -> Result<DefectedStructure> {
    let pristine = &supercell.structure;
    if pristine.count_species("Er") > 0 {
        return Err(DefectError::AlreadyDefected(
            "input supercell already contains Er".into(),
        ));
    }
    let class = config.site_class();
    let sub = select_site(pristine, "Si", class)?;
    let mut log = vec![format!(
        "{}: Er substituted for Si at supercell site {} (class {}, parent site {}, frac {:.6} {:.6} {:.6})",
        config.label(),
        sub,
        class,
        supercell.parent_index.get(sub).copied().unwrap_or(sub),
        pristine.sites[sub].frac[0],
        pristine.sites[sub].frac[1],
        pristine.sites[sub].frac[2],
    )];

    let removed = if config.has_vacancy() {
        let idx = match vacancy_override {
            Some(i) => {
                let site = pristine.sites.get(i).ok_or(CrystalError::IndexOutOfRange {
                    index: i,
                    len: pristine.sites.len(),
                })?;
                if site.species != "C" {
                    return Err(DefectError::BadVacancy {
                        index: i,
                        species: site.species.clone(),
                    });
                }
                i
            }
            None => nearest_carbon(pristine, sub).ok_or(DefectError::SiteNotFound {
                species: "C".into(),
                class: SiteClass::Unclassified,
            })?,
        };
        let v = crystal::min_image(&pristine.cell, pristine.sites[sub].frac, pristine.sites[idx].frac);
        log.push(format!(
            "{}: removed C at supercell site {} ({}; distance {:.6} A from Er{})",
            config.label(),
            idx,
            if vacancy_override.is_some() {
                "explicit index"
            } else {
                "nearest neighbour"
            },
            v.norm(),
            if (v.z.abs() / v.norm()) > 0.99 {
                ", axial"
            } else {
                ", basal"
            },
        ));
        Some(idx)
    } else {
        None
    };

    let mut sites = Vec::with_capacity(pristine.sites.len());
    for (i, site) in pristine.sites.iter().enumerate() {
        if Some(i) == removed {
            continue;
        }
        let mut site = site.clone();
        if i == sub {
            site.species = "Er".into();
        }
        sites.push(site);
    }

    Ok(DefectedStructure {
        structure: CrystalStructure {
            cell: pristine.cell.clone(),
            sites,
            stacking: pristine.stacking.clone(),
        },
        config,
        substituted_site: sub,
        removed_site: removed,
        log,
        pristine_atoms: pristine.sites.len(),
    })
}

/// Er atoms per pristine supercell atom.
pub fn doping_concentration(defected: &DefectedStructure) -> Result<f64> {
    let er = defected.structure.count_species("Er");
    if er == 0 {
        return Err(DefectError::NoDopant);
    }
    Ok(er as f64 / defected.pristine_atoms as f64)
}

impl DefectedStructure {
    /// Index of the Er atom in the defected structure's own site list.
    pub fn er_index(&self) -> usize {
        match self.removed_site {
            Some(r) if r < self.substituted_site => self.substituted_site - 1,
            _ => self.substituted_site,
        }
    }
}

// ---------------------------------------------------------------------------
// File records

#[derive(Debug, Serialize, Deserialize)]
struct SupercellRecord {
    multipliers: [usize; 3],
    parent_index: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DefectRecord {
    kind: DefectConfiguration,
    substituted_site: usize,
    removed_site: Option<usize>,
    log: Vec<String>,
    pristine_atoms: usize,
}

impl Supercell {
    pub fn to_document(&self) -> StructureDocument {
        let mut doc = StructureDocument::from(self.structure.clone());
        doc.extra.insert(
            "supercell".into(),
            serde_json::to_value(SupercellRecord {
                multipliers: self.multipliers,
                parent_index: self.parent_index.clone(),
            })
            .expect("supercell record serializes"),
        );
        doc
    }

    /// Rebuilds a supercell from a structure document. A document without a
    /// `"supercell"` object is treated as a 1×1×1 expansion of itself.
    pub fn from_document(doc: &StructureDocument) -> Result<Self> {
        if doc.extra.contains_key("defect") {
            return Err(DefectError::AlreadyDefected(
                "structure file has a \"defect\" record".into(),
            ));
        }
        match doc.extra.get("supercell") {
            Some(v) => {
                let rec: SupercellRecord =
                    serde_json::from_value(v.clone()).map_err(|e| DefectError::Record(e.to_string()))?;
                if rec.parent_index.len() != doc.structure.sites.len() {
                    return Err(DefectError::Record(format!(
                        "parent_index has {} entries for {} sites",
                        rec.parent_index.len(),
                        doc.structure.sites.len()
                    )));
                }
                Ok(Self {
                    structure: doc.structure.clone(),
                    multipliers: rec.multipliers,
                    parent_index: rec.parent_index,
                })
            }
            None => Ok(Self {
                structure: doc.structure.clone(),
                multipliers: [1, 1, 1],
                parent_index: (0..doc.structure.sites.len()).collect(),
            }),
        }
    }
}

impl DefectedStructure {
    pub fn to_document(&self) -> StructureDocument {
        let mut doc = StructureDocument::from(self.structure.clone());
        doc.extra.insert(
            "defect".into(),
            serde_json::to_value(DefectRecord {
                kind: self.config,
                substituted_site: self.substituted_site,
                removed_site: self.removed_site,
                log: self.log.clone(),
                pristine_atoms: self.pristine_atoms,
            })
            .expect("defect record serializes"),
        );
        doc
    }

    pub fn from_document(doc: &StructureDocument) -> Result<Self> {
        let v: &Value = doc
            .extra
            .get("defect")
            .ok_or_else(|| DefectError::Record("no \"defect\" object".into()))?;
        let rec: DefectRecord = serde_json::from_value(v.clone()).map_err(|e| DefectError::Record(e.to_string()))?;
        Ok(Self {
            structure: doc.structure.clone(),
            config: rec.kind,
            substituted_site: rec.substituted_site,
            removed_site: rec.removed_site,
            log: rec.log,
            pristine_atoms: rec.pristine_atoms,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(crystal::write_document(&self.to_document(), path)?)
    }
}
