//! Manifest-driven end-to-end run.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::commands::{
    analyze_set, describe_structure, dos_of, kernel_of, load_document, load_eigenvalues, load_model, load_spec,
    path_for, read_text, render_report, to_json, write_text, ZplReport,
};
use super::{CliError, KernelChoice, PipelineArgs, THREADS_ENV};
use crate::bz::{write_kpath, HEX_PATH};
use crate::crystal::{self, structure_to_json, CrystalStructure, StackingSequence};
use crate::deck::{emit_deck, DeckSettings};
use crate::defects::{apply_defect_with, doping_concentration, expand_supercell, DefectConfiguration};
use crate::energetics::{parse_ledger, render_table, write_ledger};
use crate::modelbands::{synthesize, tb_solve};
use crate::numfmt::fmt_num;
use crate::plot::{bands_csv, bands_svg, dos_csv, dos_svg};
use crate::spectra::{audit_convergence, ev_to_wavelength, find_band_edges, write_eigenvalues};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildSpec {
    pub stacking: String,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn default_a() -> f64 {
    crystal::DEFAULT_A
}

fn default_c() -> f64 {
    crystal::DEFAULT_C
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellChoice {
    /// The structure after supercell expansion and defect placement.
    #[default]
    Final,
    /// The structure as loaded or built.
    Primitive,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KpathSpec {
    pub labels: String,
    pub points: usize,
    pub cell: CellChoice,
}

impl Default for KpathSpec {
    fn default() -> Self {
        Self {
            labels: HEX_PATH.join("-"),
            points: 113,
            cell: CellChoice::Final,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Synthetic,
    Tb,
    External,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsSpec {
    pub engine: Engine,
    /// Synthetic spec file.
    pub spec: Option<PathBuf>,
    /// Tight-binding parameter file.
    pub params: Option<PathBuf>,
    /// Eigenvalue file from an external code.
    pub eig: Option<PathBuf>,
    /// Structure the tight-binding engine runs on.
    #[serde(default)]
    pub on: CellChoice,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    pub sigma: f64,
    pub delta: f64,
    pub grid: Option<usize>,
    pub window: Option<[f64; 2]>,
    pub pristine: Option<PathBuf>,
    pub kernel: String,
    pub scf_log: Option<PathBuf>,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub zpl: Option<f64>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            sigma: 0.05,
            delta: 0.2,
            grid: None,
            window: None,
            pristine: None,
            kernel: "truncated".into(),
            scf_log: None,
            tolerance: 1e-4,
            max_iterations: 100,
            zpl: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormationSpec {
    pub ledger: PathBuf,
}

/// Everything one pipeline run needs; relative paths are resolved against
/// the manifest's directory.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub structure: Option<PathBuf>,
    pub build: Option<BuildSpec>,
    pub supercell: Option<[usize; 3]>,
    pub defect: Option<DefectConfiguration>,
    pub remove_index: Option<usize>,
    #[serde(default)]
    pub kpath: KpathSpec,
    pub deck: Option<DeckSettings>,
    pub bands: Option<BandsSpec>,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    pub formation: Option<FormationSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub threads: Option<usize>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::new(
                super::ErrorKind::Parse,
                format!("manifest line {}, column {}: {e}", e.line(), e.column()),
            )
        })
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a PathBuf, CliError> {
    p.as_ref()
        .ok_or_else(|| CliError::validation(format!("manifest bands section needs '{what}'")))
}

pub(super) fn run(args: PipelineArgs) -> Result<(), CliError> {
    let text = read_text(&args.manifest)?;
    let m = RunManifest::from_json(&text).map_err(|e| e.in_file(&args.manifest))?;
    if args.threads.is_none() && std::env::var_os(THREADS_ENV).is_none() {
        super::configure_threads(m.threads)?;
    }
    let base = args.manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let out = match &args.out {
        Some(o) => o.clone(),
        None => resolve(&base, &m.output),
    };
    fs::create_dir_all(&out).map_err(|e| CliError::write(&out, &e))?;
    let mut summary: Vec<String> = Vec::new();

    let primitive: CrystalStructure = match (&m.structure, &m.build) {
        (Some(_), Some(_)) => return Err(CliError::validation("manifest gives both 'structure' and 'build'")),
        (Some(p), None) => load_document(&resolve(&base, p))?.structure,
        (None, Some(b)) => {
            let stacking: StackingSequence = b.stacking.parse()?;
            crystal::polytype(&stacking, b.a, b.c)?
        }
        (None, None) => return Err(CliError::validation("manifest needs 'structure' or 'build'")),
    };
    write_text(
        &out.join("structure.json"),
        &structure_to_json(&primitive.clone().into()),
    )?;
    summary.push(format!("structure: {}", describe_structure(&primitive)));

    let mut final_structure = primitive.clone();
    if m.supercell.is_some() || m.defect.is_some() {
        let [n1, n2, n3] = m.supercell.unwrap_or([1, 1, 1]);
        let sc = expand_supercell(&primitive, n1, n2, n3)?;
        write_text(&out.join("supercell.json"), &structure_to_json(&sc.to_document()))?;
        summary.push(format!(
            "supercell {n1}x{n2}x{n3}: {}",
            describe_structure(&sc.structure)
        ));
        final_structure = sc.structure.clone();
        if let Some(kind) = m.defect {
            let d = apply_defect_with(&sc, kind, m.remove_index)?;
            write_text(&out.join("defect.json"), &structure_to_json(&d.to_document()))?;
            summary.extend(d.log.iter().cloned());
            summary.push(format!(
                "{}: {}; concentration {}",
                kind.label(),
                describe_structure(&d.structure),
                fmt_num(doping_concentration(&d)?)
            ));
            final_structure = d.structure;
        }
    }

    let cell_of = |c: CellChoice| match c {
        CellChoice::Final => &final_structure,
        CellChoice::Primitive => &primitive,
    };
    let path = path_for(&cell_of(m.kpath.cell).cell, &m.kpath.labels, m.kpath.points)?;
    write_text(&out.join("kpath.txt"), &write_kpath(&path))?;
    summary.push(format!(
        "k-path: {} points along {}",
        path.len(),
        path.vertices.join("-")
    ));

    if let Some(settings) = &m.deck {
        // The deck's k-points are in the reciprocal basis of the cell it describes.
        let deck = if m.kpath.cell == CellChoice::Final {
            emit_deck(settings, &final_structure, &path)?
        } else {
            let own = path_for(&final_structure.cell, &m.kpath.labels, settings.nscf_kpoints)?;
            emit_deck(settings, &final_structure, &own)?
        };
        write_text(&out.join("deck.in"), &deck)?;
        summary.push("deck: deck.in".into());
    }

    if let Some(bands) = &m.bands {
        let (set, ticks) = match bands.engine {
            Engine::Synthetic => {
                let spec = load_spec(&resolve(&base, require(&bands.spec, "spec")?))?;
                (synthesize(&spec, &path)?, path.ticks())
            }
            Engine::Tb => {
                let model = load_model(&resolve(&base, require(&bands.params, "params")?))?;
                let target = cell_of(bands.on);
                if bands.on == m.kpath.cell {
                    (tb_solve(target, &model, &path)?, path.ticks())
                } else {
                    let own = path_for(&target.cell, &m.kpath.labels, m.kpath.points)?;
                    (tb_solve(target, &model, &own)?, own.ticks())
                }
            }
            Engine::External => (
                load_eigenvalues(&resolve(&base, require(&bands.eig, "eig")?))?,
                Vec::new(),
            ),
        };
        write_text(&out.join("bands.eig"), &write_eigenvalues(&set))?;
        write_text(&out.join("bands.csv"), &bands_csv(&set))?;
        write_text(&out.join("bands.svg"), &bands_svg(&set, &ticks, None, "Band structure"))?;

        let a = &m.analysis;
        let pristine = a
            .pristine
            .as_ref()
            .map(|p| load_eigenvalues(&resolve(&base, p)))
            .transpose()?;
        let mut report = analyze_set(&set, pristine.as_ref(), a.window.map(|w| (w[0], w[1])), a.delta)?;
        if let Some(log) = &a.scf_log {
            let log = resolve(&base, log);
            let text = read_text(&log)?;
            report.convergence = Some(
                audit_convergence(&text, a.tolerance, a.max_iterations).map_err(|e| CliError::from(e).in_file(&log))?,
            );
        }
        if let Some(e) = a.zpl {
            report.zpl = Some(ZplReport {
                energy_ev: e,
                wavelength_um: ev_to_wavelength(e)?,
            });
        }
        let rendered = render_report(&report);
        write_text(&out.join("report.txt"), &rendered)?;
        write_text(&out.join("report.json"), &to_json(&report))?;
        summary.extend(rendered.lines().map(str::to_string));

        let kernel = match a.kernel.as_str() {
            "truncated" => KernelChoice::Truncated,
            "gaussian" => KernelChoice::Gaussian,
            other => {
                return Err(CliError::validation(format!(
                    "analysis.kernel must be 'truncated' or 'gaussian', got '{other}'"
                )))
            }
        };
        let curve = dos_of(&set, a.sigma, None, None, a.grid, kernel_of(kernel))?;
        write_text(&out.join("dos.csv"), &dos_csv(&curve))?;
        let markers = match find_band_edges(&set) {
            Ok(e) => vec![("VBM".to_string(), e.vbm), ("CBM".to_string(), e.cbm)],
            Err(_) => Vec::new(),
        };
        write_text(
            &out.join("dos.svg"),
            &dos_svg(&curve, &markers, &format!("DOS (sigma = {} eV)", fmt_num(a.sigma))),
        )?;
    }

    if let Some(f) = &m.formation {
        let path = resolve(&base, &f.ledger);
        let text = read_text(&path)?;
        let ledger = parse_ledger(&text).map_err(|e| CliError::from(e).in_file(&path))?;
        let table = render_table(&ledger);
        write_text(&out.join("ledger.json"), &write_ledger(&ledger))?;
        write_text(&out.join("formation.txt"), &table)?;
        summary.extend(table.lines().map(str::to_string));
    }

    let mut text = summary.join("\n");
    text.push('\n');
    write_text(&out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}
