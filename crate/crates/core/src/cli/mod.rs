//! The `polydef` command line.

mod commands;
mod error;
mod pipeline;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

pub use error::{CliError, ErrorKind, EXIT_CODES};
pub use pipeline::RunManifest;

use crate::bz::HEX_PATH;
use crate::defects::DefectConfiguration;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "POLYDEF_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "polydef",
    version,
    about = "Defect workflow for hexagonal SiC polytypes: structures, supercells, k-paths, bands, DOS and formation energies",
    after_help = EXIT_CODES
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a polytype cell from a close-packed stacking sequence
    #[command(after_help = EXIT_CODES)]
    Build(BuildArgs),
    /// Expand a structure into an n1 x n2 x n3 supercell
    #[command(after_help = EXIT_CODES)]
    Supercell(SupercellArgs),
    /// Place an Er substitution (optionally with a C vacancy) in a supercell
    #[command(after_help = EXIT_CODES)]
    Defect(DefectArgs),
    /// Generate a high-symmetry k-path with an exact point count
    #[command(after_help = EXIT_CODES)]
    Kpath(KpathArgs),
    /// Emit an engine-agnostic SCF/NSCF input deck
    #[command(after_help = EXIT_CODES)]
    Deck(DeckArgs),
    /// Generate eigenvalues with the synthetic or tight-binding engine
    #[command(after_help = EXIT_CODES)]
    Bands(BandsArgs),
    /// Report band edges, gap, flat in-gap bands and SCF convergence
    #[command(after_help = EXIT_CODES)]
    Analyze(AnalyzeArgs),
    /// Gaussian-smeared density of states as CSV
    #[command(after_help = EXIT_CODES)]
    Dos(DosArgs),
    /// Relative formation energies and stability ranking
    #[command(after_help = EXIT_CODES)]
    Formation(FormationArgs),
    /// Band-structure or DOS plot as SVG (plus CSV)
    #[command(after_help = EXIT_CODES)]
    Plot(PlotArgs),
    /// Audit an SCF residual log against a tolerance and iteration cap
    #[command(after_help = EXIT_CODES)]
    Audit(AuditArgs),
    /// Run the whole workflow from a manifest file
    #[command(after_help = EXIT_CODES)]
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Stacking sequence of A/B/C layers
    #[arg(long, default_value = "ABCB")]
    pub stacking: String,
    /// In-plane lattice constant (Å)
    #[arg(long, default_value_t = 3.09)]
    pub a: f64,
    /// Out-of-plane lattice constant (Å)
    #[arg(long, default_value_t = 10.08)]
    pub c: f64,
    /// Output structure file (JSON); stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Also write an extended-XYZ file
    #[arg(long)]
    pub xyz: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SupercellArgs {
    /// Input structure file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Multipliers n1,n2,n3
    #[arg(long, value_delimiter = ',', default_value = "4,4,1")]
    pub n: Vec<usize>,
    /// Output structure file; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DefectArgs {
    /// Input (pristine supercell) structure file
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Configuration: ErH, ErK, ErHV or ErKV
    #[arg(long)]
    pub kind: DefectConfiguration,
    /// Remove this C site instead of the automatically chosen neighbour
    #[arg(long)]
    pub remove_index: Option<usize>,
    /// Output structure file; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KpathArgs {
    /// Take the cell from this structure file instead of --a/--c
    #[arg(long)]
    pub structure: Option<PathBuf>,
    /// Hexagonal a (Å) when no structure is given
    #[arg(long, default_value_t = 3.09)]
    pub a: f64,
    /// Hexagonal c (Å) when no structure is given
    #[arg(long, default_value_t = 10.08)]
    pub c: f64,
    /// Vertex labels separated by '-'
    #[arg(long, default_value_t = HEX_PATH.join("-"))]
    pub path: String,
    /// Total number of points, vertices included
    #[arg(long, default_value_t = 113)]
    pub points: usize,
    /// Output k-path file; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeckArgs {
    /// Structure file the deck describes
    #[arg(long)]
    pub structure: PathBuf,
    /// Use this k-path file for the NSCF block instead of generating one
    #[arg(long)]
    pub kpath: Option<PathBuf>,
    /// Vertex labels for a generated NSCF path
    #[arg(long, default_value_t = HEX_PATH.join("-"))]
    pub path: String,
    /// SCF energy tolerance (Ry)
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// SCF iteration cap
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Hubbard U (eV), recorded as metadata
    #[arg(long, default_value_t = 7.21)]
    pub hubbard_u: f64,
    /// Species carrying the Hubbard U
    #[arg(long, default_value = "Er")]
    pub hubbard_species: String,
    /// Number of SCF k-points
    #[arg(long, default_value_t = 2)]
    pub scf_kpoints: usize,
    /// SCF k-point as x,y,z (reciprocal fractional); repeat once per point
    #[arg(long, allow_hyphen_values = true)]
    pub scf_kpt: Vec<String>,
    /// Number of NSCF k-points along the path
    #[arg(long, default_value_t = 113)]
    pub nscf_kpoints: usize,
    /// Exchange-correlation tag
    #[arg(long, default_value = "PBE-GGA+U")]
    pub functional: String,
    /// Output deck file; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("engine").required(true).args(["synthetic", "tb"]))]
pub struct BandsArgs {
    /// Synthetic band spec file (JSON)
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    /// Tight-binding parameter file (JSON); needs --in
    #[arg(long)]
    pub tb: Option<PathBuf>,
    /// Structure file (required with --tb; sets the cell otherwise)
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Use this k-path file instead of generating one
    #[arg(long)]
    pub kpath: Option<PathBuf>,
    /// Vertex labels for a generated path
    #[arg(long, default_value_t = HEX_PATH.join("-"))]
    pub path: String,
    /// Points on a generated path
    #[arg(long, default_value_t = 113)]
    pub points: usize,
    /// Hexagonal a (Å) when no structure is given
    #[arg(long, default_value_t = 3.09)]
    pub a: f64,
    /// Hexagonal c (Å) when no structure is given
    #[arg(long, default_value_t = 10.08)]
    pub c: f64,
    /// Output eigenvalue file; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Also write the bands as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Eigenvalue file to analyse
    #[arg(long)]
    pub eig: PathBuf,
    /// Pristine eigenvalue file; its gap becomes the flat-band window
    #[arg(long)]
    pub pristine: Option<PathBuf>,
    /// Flat-band window lo,hi in eV (overrides --pristine)
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Flat-band dispersion threshold (eV)
    #[arg(long, default_value_t = 0.2)]
    pub delta: f64,
    /// SCF residual log to audit
    #[arg(long)]
    pub scf_log: Option<PathBuf>,
    /// Convergence tolerance for --scf-log (Ry)
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Iteration cap for --scf-log
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Photon energy (eV) to convert to a wavelength
    #[arg(long)]
    pub zpl: Option<f64>,
    /// Write the report as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the eigenvalues shifted so the VBM is 0
    #[arg(long)]
    pub normalized_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelChoice {
    /// Gaussian clipped at 4 sigma, exactly zero beyond
    Truncated,
    /// Untruncated Gaussian
    Gaussian,
}

#[derive(Debug, Args)]
pub struct DosArgs {
    /// Eigenvalue file
    #[arg(long)]
    pub eig: PathBuf,
    /// Gaussian width (eV)
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Grid start (eV); default lowest eigenvalue - 6 sigma
    #[arg(long, allow_hyphen_values = true)]
    pub emin: Option<f64>,
    /// Grid end (eV); default highest eigenvalue + 6 sigma
    #[arg(long, allow_hyphen_values = true)]
    pub emax: Option<f64>,
    /// Grid points; default gives a step of sigma/20
    #[arg(long)]
    pub points: Option<usize>,
    /// Smearing kernel
    #[arg(long, value_enum, default_value_t = KernelChoice::Truncated)]
    pub kernel: KernelChoice,
    /// Output CSV; stdout when omitted
    #[arg(short, long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FormationArgs {
    /// Ledger input file (JSON)
    #[arg(long)]
    pub ledger: Option<PathBuf>,
    /// Pristine total energy E_T (eV/atom), instead of --ledger
    #[arg(long, allow_hyphen_values = true)]
    pub pristine_et: Option<f64>,
    /// Configuration energy as name=value (eV/atom); repeatable
    #[arg(long, allow_hyphen_values = true)]
    pub entry: Vec<String>,
    /// Reference configuration; default is the lowest E_Def
    #[arg(long)]
    pub reference: Option<String>,
    /// Write the computed ledger (JSON)
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Bands,
    Dos,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Plot type
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Eigenvalue file
    #[arg(long)]
    pub eig: PathBuf,
    /// k-path file for vertex ticks (bands)
    #[arg(long)]
    pub kpath: Option<PathBuf>,
    /// Energy window lo,hi in eV
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Gaussian width for DOS plots (eV)
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    /// Smearing kernel for DOS plots
    #[arg(long, value_enum, default_value_t = KernelChoice::Truncated)]
    pub kernel: KernelChoice,
    /// Plot title
    #[arg(long)]
    pub title: Option<String>,
    /// Output SVG
    #[arg(long)]
    pub svg: PathBuf,
    /// Also write the plotted data as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// SCF residual log ("iter <n> dE <value> Ry" lines)
    #[arg(long)]
    pub log: PathBuf,
    /// Convergence tolerance (Ry)
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Iteration cap
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Exit with code 5 when the log is not converged
    #[arg(long)]
    pub strict: bool,
    /// Write the report as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Run manifest (JSON)
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory (overrides the manifest)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (overrides the manifest and POLYDEF_THREADS)
    #[arg(long)]
    pub threads: Option<usize>,
}

/// clap command tree, for help rendering and introspection.
pub fn command() -> clap::Command {
    Cli::command()
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(
                e.kind(),
                K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand
            ) {
                let _ = e.print();
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand {
                    Err(CliError::usage("a subcommand is required"))
                } else {
                    Ok(())
                };
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::usage(first.trim_start_matches("error: ")));
        }
    };
    let threads = match &cli.command {
        Command::Pipeline(p) => p.threads,
        _ => None,
    };
    configure_threads(threads)?;
    commands::dispatch(cli.command)
}

/// Entry point for the binary: runs and returns the process exit code.
pub fn run() -> i32 {
    match run_from(std::env::args_os()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.line());
            e.kind.exit_code()
        }
    }
}

pub(crate) fn configure_threads(explicit: Option<usize>) -> Result<(), CliError> {
    let requested = match explicit {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?,
            ),
            _ => None,
        },
    };
    let Some(n) = requested else {
        return Ok(());
    };
    if n == 0 {
        return Err(CliError::usage("thread count must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
