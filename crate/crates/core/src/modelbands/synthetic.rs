use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{ModelError, Result};
use crate::bz::KPath;
use crate::spectra::{EigenvalueSet, KSample};

/// Direction `d` of each cosine mode; a band disperses as `cos(2π k·d)`
/// with `k` in reciprocal fractional coordinates.
pub const MODE_DIRECTIONS: [[f64; 3]; 5] = [
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 1.0, 0.0],
    [1.0, 0.0, 1.0],
    [0.0, 1.0, 0.0],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandTerm {
    pub base: f64,
    pub amplitude: f64,
    pub mode: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectLevel {
    pub energy: f64,
    pub ripple: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticBandSpec {
    pub bands: Vec<BandTerm>,
    #[serde(default)]
    pub defect_levels: Vec<DefectLevel>,
    pub electrons: u32,
    pub spin_degeneracy: u8,
}

impl SyntheticBandSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn state_count(&self) -> usize {
        self.bands.len() + self.defect_levels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ModelError::InvalidSpec(m));
        if self.state_count() == 0 {
            return bad("no bands or defect levels".into());
        }
        if !matches!(self.spin_degeneracy, 1 | 2) {
            return bad(format!("spin degeneracy must be 1 or 2, got {}", self.spin_degeneracy));
        }
        for (i, b) in self.bands.iter().enumerate() {
            if !b.base.is_finite() || !(b.amplitude >= 0.0) || !b.amplitude.is_finite() {
                return bad(format!("band {i}: base must be finite and amplitude >= 0"));
            }
            if b.mode >= MODE_DIRECTIONS.len() {
                return bad(format!(
                    "band {i}: unknown mode {} (0..{})",
                    b.mode,
                    MODE_DIRECTIONS.len() - 1
                ));
            }
        }
        for (i, l) in self.defect_levels.iter().enumerate() {
            if !l.energy.is_finite() || !(l.ripple >= 0.0) || !l.ripple.is_finite() {
                return bad(format!("defect level {i}: energy must be finite and ripple >= 0"));
            }
        }
        let capacity = usize::from(self.spin_degeneracy) * self.state_count();
        if self.electrons as usize > capacity {
            return Err(ModelError::TooManyElectrons {
                electrons: self.electrons,
                capacity,
            });
        }
        Ok(())
    }
}

/// Evaluates the spec on every point of `path`; weights are uniform.
pub fn synthesize(spec: &SyntheticBandSpec, path: &KPath) -> Result<EigenvalueSet> {
    spec.validate()?;
    let w = 1.0 / path.len() as f64;
    let mut kpoints = Vec::with_capacity(path.len());
    let mut bands = Vec::with_capacity(path.len());
    for p in &path.points {
        let k = p.frac;
        let mut row: Vec<f64> = spec
            .bands
            .iter()
            .map(|b| {
                let d = MODE_DIRECTIONS[b.mode];
                b.base + b.amplitude * (TAU * (k[0] * d[0] + k[1] * d[1] + k[2] * d[2])).cos()
            })
            .chain(
                spec.defect_levels
                    .iter()
                    .map(|l| l.energy + l.ripple * (TAU * k[0]).cos()),
            )
            .collect();
        row.sort_by(f64::total_cmp);
        bands.push(row);
        kpoints.push(KSample {
            frac: k,
            weight: w,
            s: Some(p.s),
        });
    }
    let mut set = EigenvalueSet::new(kpoints, bands, spec.electrons, spec.spin_degeneracy)?;
    set.warnings.clear();
    Ok(set)
}
