use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::error::{CliError, ErrorKind};
use super::*;
use crate::bz::{build_kpath, parse_path_labels, read_kpath, write_kpath, KPath};
use crate::crystal::{self, structure_from_json, structure_to_json, CrystalStructure, SiteClass, StackingSequence};
use crate::deck::{emit_deck, DeckSettings};
use crate::defects::{apply_defect_with, doping_concentration, expand_supercell, Supercell};
use crate::energetics::{
    parse_ledger, relative_formation_energies, render_table, stability_ranking, write_ledger, EnergyLedger,
};
use crate::modelbands::{synthesize, tb_solve, SyntheticBandSpec, TbModel};
use crate::numfmt::fmt_num;
use crate::plot::{bands_csv, bands_svg, dos_csv, dos_svg};
use crate::spectra::{
    audit_convergence, compute_dos_with, detect_flat_bands, ev_to_wavelength, find_band_edges, normalize_to_vbm,
    parse_eigenvalues, write_eigenvalues, BandEdges, ConvergenceReport, DosCurve, DosParams, EigenvalueSet, Kernel,
};

pub(super) fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Build(a) => build(a),
        Command::Supercell(a) => supercell(a),
        Command::Defect(a) => defect(a),
        Command::Kpath(a) => kpath(a),
        Command::Deck(a) => deck(a),
        Command::Bands(a) => bands(a),
        Command::Analyze(a) => analyze(a),
        Command::Dos(a) => dos(a),
        Command::Formation(a) => formation(a),
        Command::Plot(a) => plot(a),
        Command::Audit(a) => audit(a),
        Command::Pipeline(a) => super::pipeline::run(a),
    }
}

// ---------------------------------------------------------------------------
// File helpers

pub(super) fn read_text(path: &Path) -> Result<String, CliError> {
    if !path.exists() {
        return Err(CliError::new(
            ErrorKind::NotFound,
            format!("input file not found: {}", path.display()),
        ));
    }
    fs::read_to_string(path).map_err(|e| CliError::io(path, &e))
}

pub(super) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::write(path, &e))
}

/// Writes to `out`, or to stdout when no path is given.
fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub(super) fn load_document(path: &Path) -> Result<crystal::StructureDocument, CliError> {
    let text = read_text(path)?;
    structure_from_json(&text).map_err(|e| CliError::from(e).in_file(path))
}

pub(super) fn load_eigenvalues(path: &Path) -> Result<EigenvalueSet, CliError> {
    let text = read_text(path)?;
    parse_eigenvalues(&text).map_err(|e| CliError::from(e).in_file(path))
}

pub(super) fn load_kpath(path: &Path) -> Result<KPath, CliError> {
    let text = read_text(path)?;
    read_kpath(&text).map_err(|e| CliError::from(e).in_file(path))
}

pub(super) fn load_spec(path: &Path) -> Result<SyntheticBandSpec, CliError> {
    let text = read_text(path)?;
    SyntheticBandSpec::from_json(&text).map_err(|e| CliError::from(e).in_file(path))
}

pub(super) fn load_model(path: &Path) -> Result<TbModel, CliError> {
    let text = read_text(path)?;
    TbModel::from_json(&text).map_err(|e| CliError::from(e).in_file(path))
}

pub(super) fn parse_pair(text: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::usage(format!("{what} must be 'lo,hi', got '{text}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].parse().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn parse_triplet(text: &str) -> Result<[f64; 3], CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::usage(format!("expected x,y,z, got '{text}'")))?;
    <[f64; 3]>::try_from(v).map_err(|_| CliError::usage(format!("expected x,y,z, got '{text}'")))
}

pub(super) fn describe_structure(s: &CrystalStructure) -> String {
    let mut species: Vec<(&str, usize)> = Vec::new();
    for site in &s.sites {
        match species.iter_mut().find(|(n, _)| *n == site.species) {
            Some((_, c)) => *c += 1,
            None => species.push((&site.species, 1)),
        }
    }
    let counts: Vec<String> = species.iter().map(|(n, c)| format!("{n} {c}")).collect();
    let si_class = |class| {
        s.sites
            .iter()
            .filter(|x| x.species == "Si" && x.site_class == class)
            .count()
    };
    format!(
        "{} atoms ({}); Si sites h={} k={}",
        s.sites.len(),
        counts.join(", "),
        si_class(SiteClass::H),
        si_class(SiteClass::K)
    )
}

// ---------------------------------------------------------------------------
// Subcommands

fn build(a: BuildArgs) -> Result<(), CliError> {
    let stacking: StackingSequence = a.stacking.parse()?;
    let structure = crystal::polytype(&stacking, a.a, a.c)?;
    emit(&a.out, &structure_to_json(&structure.clone().into()))?;
    if let Some(xyz) = &a.xyz {
        let mut buf = Vec::new();
        crystal::write_extxyz(&structure, &mut buf).map_err(|e| CliError::io(xyz, &e))?;
        fs::write(xyz, buf).map_err(|e| CliError::write(xyz, &e))?;
    }
    if a.out.is_some() {
        println!("{}: {}", stacking, describe_structure(&structure));
    }
    Ok(())
}

fn supercell(a: SupercellArgs) -> Result<(), CliError> {
    let n: [usize; 3] =
        a.n.as_slice()
            .try_into()
            .map_err(|_| CliError::usage(format!("--n needs three multipliers, got {}", a.n.len())))?;
    let doc = load_document(&a.input)?;
    let sc = expand_supercell(&doc.structure, n[0], n[1], n[2])?;
    emit(&a.out, &structure_to_json(&sc.to_document()))?;
    if a.out.is_some() {
        println!(
            "supercell {}x{}x{}: {}",
            n[0],
            n[1],
            n[2],
            describe_structure(&sc.structure)
        );
    }
    Ok(())
}

fn defect(a: DefectArgs) -> Result<(), CliError> {
    let doc = load_document(&a.input)?;
    let sc = Supercell::from_document(&doc)?;
    let defected = apply_defect_with(&sc, a.kind, a.remove_index)?;
    let conc = doping_concentration(&defected)?;
    emit(&a.out, &structure_to_json(&defected.to_document()))?;
    if a.out.is_some() {
        for line in &defected.log {
            println!("{line}");
        }
        println!(
            "{}: {}",
            defected.config.label(),
            describe_structure(&defected.structure)
        );
        println!("concentration = {} ({:.2} %)", fmt_num(conc), conc * 100.0);
    }
    Ok(())
}

pub(super) fn path_for(cell: &crystal::LatticeCell, labels: &str, points: usize) -> Result<KPath, CliError> {
    let labels = parse_path_labels(labels);
    Ok(build_kpath(cell, &labels, points)?)
}

fn kpath(a: KpathArgs) -> Result<(), CliError> {
    let cell = match &a.structure {
        Some(p) => load_document(p)?.structure.cell,
        None => crystal::LatticeCell::hexagonal(a.a, a.c)?,
    };
    let path = path_for(&cell, &a.path, a.points)?;
    emit(&a.out, &write_kpath(&path))?;
    if a.out.is_some() {
        let steps: Vec<String> = path.segment_steps.iter().map(|s| s.to_string()).collect();
        println!(
            "{} points along {}; steps per segment {}",
            path.len(),
            path.vertices.join("-"),
            steps.join(",")
        );
    }
    Ok(())
}

fn deck(a: DeckArgs) -> Result<(), CliError> {
    let doc = load_document(&a.structure)?;
    let scf_kpoint_list = if a.scf_kpt.is_empty() {
        None
    } else {
        Some(
            a.scf_kpt
                .iter()
                .map(|t| parse_triplet(t))
                .collect::<Result<Vec<_>, _>>()?,
        )
    };
    let settings = DeckSettings {
        scf_tolerance: a.tolerance,
        max_iterations: a.max_iter,
        hubbard_u: a.hubbard_u,
        hubbard_species: a.hubbard_species,
        scf_kpoints: a.scf_kpoints,
        scf_kpoint_list,
        nscf_kpoints: a.nscf_kpoints,
        functional: a.functional,
    };
    settings.validate()?;
    let path = match &a.kpath {
        Some(p) => load_kpath(p)?,
        None => path_for(&doc.structure.cell, &a.path, a.nscf_kpoints)?,
    };
    emit(&a.out, &emit_deck(&settings, &doc.structure, &path)?)
}

fn bands(a: BandsArgs) -> Result<(), CliError> {
    let structure = a.input.as_deref().map(load_document).transpose()?.map(|d| d.structure);
    let cell = match &structure {
        Some(s) => s.cell.clone(),
        None => crystal::LatticeCell::hexagonal(a.a, a.c)?,
    };
    let path = match &a.kpath {
        Some(p) => load_kpath(p)?,
        None => path_for(&cell, &a.path, a.points)?,
    };
    let set = if let Some(spec) = &a.synthetic {
        synthesize(&load_spec(spec)?, &path)?
    } else {
        let params = a.tb.as_ref().expect("clap enforces one engine");
        let structure = structure.ok_or_else(|| CliError::usage("--tb needs a structure via --in"))?;
        tb_solve(&structure, &load_model(params)?, &path)?
    };
    emit(&a.out, &write_eigenvalues(&set))?;
    if let Some(csv) = &a.csv {
        write_text(csv, &bands_csv(&set))?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub(super) struct FlatReport {
    pub band: usize,
    pub mean: f64,
    pub bandwidth: f64,
    /// "vbm" or "cbm": which half of the window the level sits in.
    pub near: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub(super) struct ZplReport {
    pub energy_ev: f64,
    pub wavelength_um: f64,
}

#[derive(Debug, Clone, Serialize)]
pub(super) struct AnalysisReport {
    pub nk: usize,
    pub nbands: usize,
    pub electrons: u32,
    pub spin_degeneracy: u8,
    pub edges: BandEdges,
    pub window: (f64, f64),
    pub delta: f64,
    pub flat_bands: Vec<FlatReport>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zpl: Option<ZplReport>,
}

pub(super) fn analyze_set(
    set: &EigenvalueSet,
    pristine: Option<&EigenvalueSet>,
    window: Option<(f64, f64)>,
    delta: f64,
) -> Result<AnalysisReport, CliError> {
    let edges = find_band_edges(set)?;
    let window = match (window, pristine) {
        (Some(w), _) => w,
        (None, Some(p)) => {
            let pe = find_band_edges(p)?;
            if !pe.has_gap() {
                return Err(CliError::validation("pristine spectrum has no gap; pass --window"));
            }
            (pe.vbm, pe.cbm)
        }
        (None, None) => set.energy_range(),
    };
    let mid = 0.5 * (window.0 + window.1);
    let flat_bands = detect_flat_bands(set, window, delta)?
        .into_iter()
        .map(|f| FlatReport {
            band: f.band + 1,
            mean: f.mean,
            bandwidth: f.bandwidth,
            near: if f.mean < mid { "vbm" } else { "cbm" },
        })
        .collect();
    Ok(AnalysisReport {
        nk: set.nk(),
        nbands: set.nbands(),
        electrons: set.electrons,
        spin_degeneracy: set.spin_degeneracy,
        edges,
        window,
        delta,
        flat_bands,
        warnings: set.warnings.clone(),
        convergence: None,
        zpl: None,
    })
}

pub(super) fn render_report(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let e = &r.edges;
    let _ = writeln!(
        out,
        "eigenvalues: nk={} nbands={} electrons={} spin={}",
        r.nk, r.nbands, r.electrons, r.spin_degeneracy
    );
    let _ = writeln!(out, "occupied bands: {}", e.n_occ);
    let _ = writeln!(out, "VBM = {} eV (k index {})", fmt_num(e.vbm), e.vbm_k + 1);
    let _ = writeln!(out, "CBM = {} eV (k index {})", fmt_num(e.cbm), e.cbm_k + 1);
    if e.has_gap() {
        let _ = writeln!(out, "gap = {} eV", fmt_num(e.gap));
    } else {
        let _ = writeln!(out, "gap = none (band overlap {} eV)", fmt_num(-e.gap));
    }
    let _ = writeln!(
        out,
        "flat bands (width < {} eV, mean in ({}, {}) eV): {}",
        fmt_num(r.delta),
        fmt_num(r.window.0),
        fmt_num(r.window.1),
        r.flat_bands.len()
    );
    for f in &r.flat_bands {
        let _ = writeln!(
            out,
            "  band {}: mean {} eV, width {} eV, near {}",
            f.band,
            fmt_num(f.mean),
            fmt_num(f.bandwidth),
            f.near.to_uppercase()
        );
    }
    if let Some(c) = &r.convergence {
        let _ = writeln!(
            out,
            "SCF: {} after {} iterations (|dE| = {} Ry = {} eV; tolerance {} Ry, cap {})",
            if c.converged { "converged" } else { "NOT converged" },
            c.iterations,
            fmt_num(c.final_residual),
            fmt_num(c.final_residual_ev()),
            fmt_num(c.threshold),
            c.max_iterations
        );
    }
    if let Some(z) = &r.zpl {
        let _ = writeln!(
            out,
            "photon {} eV -> {} um",
            fmt_num(z.energy_ev),
            fmt_num(z.wavelength_um)
        );
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub(super) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn analyze(a: AnalyzeArgs) -> Result<(), CliError> {
    let set = load_eigenvalues(&a.eig)?;
    let pristine = a.pristine.as_deref().map(load_eigenvalues).transpose()?;
    let window = a.window.as_deref().map(|w| parse_pair(w, "--window")).transpose()?;
    let mut report = analyze_set(&set, pristine.as_ref(), window, a.delta)?;
    if let Some(log) = &a.scf_log {
        let text = read_text(log)?;
        report.convergence =
            Some(audit_convergence(&text, a.tolerance, a.max_iter).map_err(|e| CliError::from(e).in_file(log))?);
    }
    if let Some(e) = a.zpl {
        report.zpl = Some(ZplReport {
            energy_ev: e,
            wavelength_um: ev_to_wavelength(e)?,
        });
    }
    print!("{}", render_report(&report));
    if let Some(p) = &a.json {
        write_text(p, &to_json(&report))?;
    }
    if let Some(p) = &a.normalized_out {
        write_text(p, &write_eigenvalues(&normalize_to_vbm(&set)?))?;
    }
    Ok(())
}

pub(super) fn kernel_of(choice: KernelChoice) -> Kernel {
    match choice {
        KernelChoice::Truncated => Kernel::default(),
        KernelChoice::Gaussian => Kernel::Gaussian,
    }
}

/// DOS over `[emin, emax]` (default: spectrum ± 6σ) with step σ/20 unless
/// `points` is given.
pub(super) fn dos_of(
    set: &EigenvalueSet,
    sigma: f64,
    emin: Option<f64>,
    emax: Option<f64>,
    points: Option<usize>,
    kernel: Kernel,
) -> Result<DosCurve, CliError> {
    if !(sigma > 0.0) {
        return Err(CliError::validation(format!("sigma must be positive, got {sigma}")));
    }
    let (lo, hi) = set.energy_range();
    let e_min = emin.unwrap_or(lo - 6.0 * sigma);
    let e_max = emax.unwrap_or(hi + 6.0 * sigma);
    let n_grid = match points {
        Some(n) => n,
        None => (((e_max - e_min) / (sigma / 20.0)).ceil() as usize + 1).max(2),
    };
    Ok(compute_dos_with(
        set,
        &DosParams {
            e_min,
            e_max,
            n_grid,
            sigma,
            kernel,
        },
    )?)
}

fn edge_markers(set: &EigenvalueSet) -> Vec<(String, f64)> {
    match find_band_edges(set) {
        Ok(e) => vec![("VBM".into(), e.vbm), ("CBM".into(), e.cbm)],
        Err(_) => Vec::new(),
    }
}

fn dos(a: DosArgs) -> Result<(), CliError> {
    let set = load_eigenvalues(&a.eig)?;
    let curve = dos_of(&set, a.sigma, a.emin, a.emax, a.points, kernel_of(a.kernel))?;
    emit(&a.out, &dos_csv(&curve))?;
    if let Some(svg) = &a.svg {
        let title = format!("DOS (sigma = {} eV)", fmt_num(a.sigma));
        write_text(svg, &dos_svg(&curve, &edge_markers(&set), &title))?;
    }
    Ok(())
}

fn formation(a: FormationArgs) -> Result<(), CliError> {
    let ledger: EnergyLedger = match (&a.ledger, a.pristine_et) {
        (Some(_), Some(_)) => return Err(CliError::usage("use either --ledger or --pristine-et/--entry")),
        (Some(path), None) => {
            if !a.entry.is_empty() {
                return Err(CliError::usage("--entry cannot be combined with --ledger"));
            }
            let text = read_text(path)?;
            let ledger = parse_ledger(&text).map_err(|e| CliError::from(e).in_file(path))?;
            match &a.reference {
                Some(r) => {
                    let entries: Vec<(String, f64)> = ledger.entries.iter().map(|(n, e)| (n.clone(), *e)).collect();
                    relative_formation_energies(ledger.pristine_e_t, &entries, Some(r))?
                }
                None => ledger,
            }
        }
        (None, Some(et)) => {
            let entries = a
                .entry
                .iter()
                .map(|t| {
                    let (name, value) = t
                        .split_once('=')
                        .ok_or_else(|| CliError::usage(format!("--entry must be name=value, got '{t}'")))?;
                    let v: f64 = value
                        .trim()
                        .parse()
                        .map_err(|_| CliError::usage(format!("--entry value is not a number: '{t}'")))?;
                    Ok((name.trim().to_string(), v))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            relative_formation_energies(et, &entries, a.reference.as_deref())?
        }
        (None, None) => return Err(CliError::usage("need --ledger or --pristine-et with --entry")),
    };
    print!("{}", render_table(&ledger));
    let ranking = stability_ranking(&ledger);
    println!(
        "most stable: {}; reference: {}; E_0 = {} eV/atom",
        ranking[0].name,
        ledger.reference,
        fmt_num(ledger.e0)
    );
    if let Some(p) = &a.out {
        write_text(p, &write_ledger(&ledger))?;
    }
    Ok(())
}

/// Vertex ticks come from a k-path file; eigenvalue files carry no labels.
fn ticks_for(kpath: Option<&Path>) -> Result<Vec<(String, f64)>, CliError> {
    kpath.map_or(Ok(Vec::new()), |p| Ok(load_kpath(p)?.ticks()))
}

fn plot(a: PlotArgs) -> Result<(), CliError> {
    let set = load_eigenvalues(&a.eig)?;
    let window = a.window.as_deref().map(|w| parse_pair(w, "--window")).transpose()?;
    match a.kind {
        PlotKind::Bands => {
            let ticks = ticks_for(a.kpath.as_deref())?;
            let title = a.title.unwrap_or_else(|| "Band structure".into());
            write_text(&a.svg, &bands_svg(&set, &ticks, window, &title))?;
            if let Some(csv) = &a.csv {
                write_text(csv, &bands_csv(&set))?;
            }
        }
        PlotKind::Dos => {
            let (emin, emax) = match window {
                Some((lo, hi)) => (Some(lo), Some(hi)),
                None => (None, None),
            };
            let curve = dos_of(&set, a.sigma, emin, emax, None, kernel_of(a.kernel))?;
            let title = a
                .title
                .unwrap_or_else(|| format!("DOS (sigma = {} eV)", fmt_num(a.sigma)));
            write_text(&a.svg, &dos_svg(&curve, &edge_markers(&set), &title))?;
            if let Some(csv) = &a.csv {
                write_text(csv, &dos_csv(&curve))?;
            }
        }
    }
    Ok(())
}

fn audit(a: AuditArgs) -> Result<(), CliError> {
    let text = read_text(&a.log)?;
    let report = audit_convergence(&text, a.tolerance, a.max_iter).map_err(|e| CliError::from(e).in_file(&a.log))?;
    println!(
        "{}: {} after {} iterations; |dE| = {} Ry ({} eV); tolerance {} Ry, cap {}",
        a.log.display(),
        if report.converged { "converged" } else { "NOT converged" },
        report.iterations,
        fmt_num(report.final_residual),
        fmt_num(report.final_residual_ev()),
        fmt_num(report.threshold),
        report.max_iterations
    );
    if let Some(p) = &a.json {
        write_text(p, &to_json(&report))?;
    }
    if a.strict && !report.converged {
        return Err(CliError::validation(format!("{} is not converged", a.log.display())));
    }
    Ok(())
}
