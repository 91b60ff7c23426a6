//! Relative formation energies of defect configurations.
//!
//! E_R(x) = E_T − E_Def(x) − E_0 with E_0 = E_T − E_Def(ref), so the
//! reference sits at exactly zero and E_R(x) = E_Def(ref) − E_Def(x).
//! All energies are per atom.

use std::fmt::{self, Write as _};
use std::path::Path;

use indexmap::IndexMap;
use serde::de::{self, Deserializer, MapAccess, Visitor};
use serde::Deserialize;
use thiserror::Error;

use crate::numfmt::fmt_num;

/// Relative energies closer than this are reported as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EnergeticsError {
    #[error("no configurations given")]
    Empty,
    #[error("duplicate configuration '{0}'")]
    Duplicate(String),
    #[error("reference configuration '{0}' is not among the entries")]
    UnknownReference(String),
    #[error("energy of '{0}' is not finite")]
    NonFinite(String),
    #[error("atom count must be positive for '{0}'")]
    BadAtoms(String),
    #[error("ledger parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("inconsistent ledger: {0}")]
    Inconsistent(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = EnergeticsError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLedger {
    /// Pristine total energy E_T, eV/atom.
    pub pristine_e_t: f64,
    /// E_Def per configuration, eV/atom, in input order.
    pub entries: IndexMap<String, f64>,
    pub reference: String,
    /// eV/atom.
    pub e0: f64,
    /// E_R per configuration, eV/atom.
    pub results: IndexMap<String, f64>,
}

/// Total cell energy to eV/atom.
pub fn per_atom(total_energy: f64, atoms: usize) -> Result<f64> {
    if atoms == 0 {
        return Err(EnergeticsError::BadAtoms(format!("{total_energy}")));
    }
    Ok(total_energy / atoms as f64)
}

/// Without an explicit `reference` the entry with the lowest E_Def is used
/// (lexicographically first on exact ties), which gives every other entry a
/// negative E_R.
pub fn relative_formation_energies<S: AsRef<str>>(
    pristine_e_t: f64,
    entries: &[(S, f64)],
    reference: Option<&str>,
) -> Result<EnergyLedger> {
    if entries.is_empty() {
        return Err(EnergeticsError::Empty);
    }
    if !pristine_e_t.is_finite() {
        return Err(EnergeticsError::NonFinite("pristine_E_T".into()));
    }
    let mut map = IndexMap::with_capacity(entries.len());
    for (name, e) in entries {
        let name = name.as_ref();
        if !e.is_finite() {
            return Err(EnergeticsError::NonFinite(name.to_string()));
        }
        if map.insert(name.to_string(), *e).is_some() {
            return Err(EnergeticsError::Duplicate(name.to_string()));
        }
    }
    let reference = match reference {
        Some(r) => {
            if !map.contains_key(r) {
                return Err(EnergeticsError::UnknownReference(r.to_string()));
            }
            r.to_string()
        }
        None => map
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1).then_with(|| a.0.cmp(b.0)))
            .map(|(n, _)| n.clone())
            .expect("non-empty"),
    };
    let e0 = pristine_e_t - map[&reference];
    let results = map
        .iter()
        .map(|(n, e_def)| (n.clone(), (pristine_e_t - e_def) - e0))
        .collect();
    Ok(EnergyLedger {
        pristine_e_t,
        entries: map,
        reference,
        e0,
        results,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedConfig {
    pub name: String,
    pub relative_energy: f64,
    /// E_R minus that of the previous entry in the ranking.
    pub gap_to_previous: Option<f64>,
    /// Whether this entry is within [`TIE_TOLERANCE`] of a neighbour.
    pub tied: bool,
}

/// Configurations from most to least stable (ascending E_R). Runs of
/// entries within [`TIE_TOLERANCE`] of the run's first member are ordered by
/// name and flagged as tied.
pub fn stability_ranking(ledger: &EnergyLedger) -> Vec<RankedConfig> {
    let mut items: Vec<(&String, f64)> = ledger.results.iter().map(|(n, e)| (n, *e)).collect();
    items.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));

    let mut groups: Vec<Vec<(&String, f64)>> = Vec::new();
    for item in items {
        match groups.last_mut() {
            Some(g) if (item.1 - g[0].1).abs() <= TIE_TOLERANCE => g.push(item),
            _ => groups.push(vec![item]),
        }
    }
    let mut out: Vec<RankedConfig> = Vec::with_capacity(ledger.results.len());
    for mut group in groups {
        group.sort_by(|a, b| a.0.cmp(b.0));
        let tied = group.len() > 1;
        for (name, e) in group {
            let gap_to_previous = out.last().map(|p| e - p.relative_energy);
            out.push(RankedConfig {
                name: name.clone(),
                relative_energy: e,
                gap_to_previous,
                tied,
            });
        }
    }
    out
}

/// Rounds to 4 decimals without producing "-0.0000".
pub fn four_decimals(x: f64) -> String {
    let s = format!("{x:.4}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Aligned text table of E_R, in ranking order.
pub fn render_table(ledger: &EnergyLedger) -> String {
    let ranking = stability_ranking(ledger);
    let width = ranking
        .iter()
        .map(|r| r.name.len())
        .max()
        .unwrap_or(0)
        .max("Configuration".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>13}  {:>10}",
        "Configuration", "E_R (eV/atom)", "gap"
    );
    for r in &ranking {
        let gap = r.gap_to_previous.map(four_decimals).unwrap_or_default();
        let tie = if r.tied { "  (tied)" } else { "" };
        let reference = if r.name == ledger.reference {
            "  [reference]"
        } else {
            ""
        };
        let row = format!(
            "{:<width$}  {:>13}  {:>10}{tie}{reference}",
            r.name,
            four_decimals(r.relative_energy),
            gap
        );
        let _ = writeln!(out, "{}", row.trim_end());
    }
    out
}

// ---------------------------------------------------------------------------
// Ledger files (JSON syntax)

enum EntryValue {
    PerAtom(f64),
    Total { total_energy: f64, atoms: usize },
}

impl<'de> Deserialize<'de> for EntryValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Total {
            total_energy: f64,
            atoms: usize,
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Total(Total),
        }
        Ok(
            match Raw::deserialize(d).map_err(|_| {
                de::Error::custom("entry must be a number (eV/atom) or {\"total_energy\": eV, \"atoms\": n}")
            })? {
                Raw::Number(x) => EntryValue::PerAtom(x),
                Raw::Total(Total { total_energy, atoms }) => EntryValue::Total { total_energy, atoms },
            },
        )
    }
}

/// Map that keeps file order and rejects repeated keys.
struct UniqueMap<V>(Vec<(String, V)>);

impl<'de, V: Deserialize<'de>> Deserialize<'de> for UniqueMap<V> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V_<V>(std::marker::PhantomData<V>);
        impl<'de, V: Deserialize<'de>> Visitor<'de> for V_<V> {
            type Value = UniqueMap<V>;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map of configuration names")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out: Vec<(String, V)> = Vec::new();
                while let Some(key) = map.next_key::<String>()? {
                    if out.iter().any(|(k, _)| *k == key) {
                        return Err(de::Error::custom(format!("duplicate configuration '{key}'")));
                    }
                    let value = map.next_value()?;
                    out.push((key, value));
                }
                Ok(UniqueMap(out))
            }
        }
        d.deserialize_map(V_(std::marker::PhantomData))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LedgerFile {
    #[serde(rename = "pristine_E_T")]
    pristine_e_t: EntryValue,
    entries: UniqueMap<EntryValue>,
    #[serde(default)]
    reference: Option<String>,
    #[serde(rename = "E_0", default)]
    e0: Option<f64>,
    #[serde(default)]
    results: Option<UniqueMap<f64>>,
}

fn resolve(name: &str, v: EntryValue) -> Result<f64> {
    match v {
        EntryValue::PerAtom(x) => Ok(x),
        EntryValue::Total { total_energy, atoms } => {
            per_atom(total_energy, atoms).map_err(|_| EnergeticsError::BadAtoms(name.to_string()))
        }
    }
}

fn agrees(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Parses a ledger. Stored `E_0`/`results`, when present, are kept as
/// written after checking them against the recomputed values.
pub fn parse_ledger(text: &str) -> Result<EnergyLedger> {
    let file: LedgerFile = serde_json::from_str(text).map_err(|e| EnergeticsError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let e_t = resolve("pristine_E_T", file.pristine_e_t)?;
    let entries = file
        .entries
        .0
        .into_iter()
        .map(|(n, v)| resolve(&n, v).map(|e| (n, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut ledger = relative_formation_energies(e_t, &entries, file.reference.as_deref())?;
    if let Some(e0) = file.e0 {
        if !agrees(e0, ledger.e0) {
            return Err(EnergeticsError::Inconsistent(format!(
                "E_0 {e0} but inputs give {}",
                ledger.e0
            )));
        }
        ledger.e0 = e0;
    }
    if let Some(stored) = file.results {
        if stored.0.len() != ledger.results.len() {
            return Err(EnergeticsError::Inconsistent(
                "results and entries differ in size".into(),
            ));
        }
        for (name, value) in stored.0 {
            let Some(computed) = ledger.results.get_mut(&name) else {
                return Err(EnergeticsError::Inconsistent(format!(
                    "result for unknown configuration '{name}'"
                )));
            };
            if !agrees(value, *computed) {
                return Err(EnergeticsError::Inconsistent(format!(
                    "result for '{name}' is {value}, inputs give {computed}"
                )));
            }
            *computed = value;
        }
        if ledger.results[&ledger.reference] != 0.0 {
            return Err(EnergeticsError::Inconsistent("reference result is not zero".into()));
        }
    }
    Ok(ledger)
}

pub fn read_ledger(path: impl AsRef<Path>) -> Result<EnergyLedger> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EnergeticsError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_ledger(&text)
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn write_map(out: &mut String, key: &str, map: &IndexMap<String, f64>) {
    let _ = writeln!(out, "  {}: {{", quoted(key));
    for (i, (name, value)) in map.iter().enumerate() {
        let comma = if i + 1 < map.len() { "," } else { "" };
        let _ = writeln!(out, "    {}: {}{comma}", quoted(name), fmt_num(*value));
    }
    out.push_str("  }");
}

pub fn write_ledger(ledger: &EnergyLedger) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"pristine_E_T\": {},", fmt_num(ledger.pristine_e_t));
    write_map(&mut out, "entries", &ledger.entries);
    out.push_str(",\n");
    let _ = writeln!(out, "  \"reference\": {},", quoted(&ledger.reference));
    let _ = writeln!(out, "  \"E_0\": {},", fmt_num(ledger.e0));
    write_map(&mut out, "results", &ledger.results);
    out.push_str("\n}\n");
    out
}
