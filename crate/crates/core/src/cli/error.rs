use std::fmt;
use std::io;
use std::path::Path;

use crate::bz::BzError;
use crate::crystal::CrystalError;
use crate::deck::DeckError;
use crate::defects::DefectError;
use crate::energetics::EnergeticsError;
use crate::modelbands::ModelError;
use crate::spectra::SpectraError;

/// Exit-code table shown in every `--help`.
pub const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (unknown flag, missing or malformed argument)
  3  I/O error (file cannot be read or written)
  4  parse error in an input file (line/column reported)
  5  validation error (input violates a precondition)
  6  input file not found
  7  numerical or internal error";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Io,
    Parse,
    Validation,
    NotFound,
    Internal,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Io => 3,
            ErrorKind::Parse => 4,
            ErrorKind::Validation => 5,
            ErrorKind::NotFound => 6,
            ErrorKind::Internal => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Io => "io",
            ErrorKind::Parse => "parse",
            ErrorKind::Validation => "validation",
            ErrorKind::NotFound => "not-found",
            ErrorKind::Internal => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Usage, message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(ErrorKind::Validation, message)
    }

    pub fn io(path: &Path, err: &io::Error) -> Self {
        let kind = if err.kind() == io::ErrorKind::NotFound {
            ErrorKind::NotFound
        } else {
            ErrorKind::Io
        };
        Self::new(kind, format!("{}: {err}", path.display()))
    }

    /// Failure to write an output; never "not found", which is reserved for inputs.
    pub fn write(path: &Path, err: &io::Error) -> Self {
        Self::new(ErrorKind::Io, format!("cannot write {}: {err}", path.display()))
    }

    /// Prefixes the message with the file it concerns.
    pub fn in_file(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }

    /// The single line printed to stderr.
    pub fn line(&self) -> String {
        let msg = serde_json::to_string(&self.message.replace('\n', " ")).expect("strings serialize");
        format!(
            "error kind={} code={} message={msg}",
            self.kind.name(),
            self.kind.exit_code()
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.line())
    }
}

impl std::error::Error for CliError {}

fn io_kind(e: &io::Error) -> ErrorKind {
    if e.kind() == io::ErrorKind::NotFound {
        ErrorKind::NotFound
    } else {
        ErrorKind::Io
    }
}

impl From<CrystalError> for CliError {
    fn from(e: CrystalError) -> Self {
        let kind = match &e {
            CrystalError::Parse { .. } => ErrorKind::Parse,
            CrystalError::Io { source, .. } => io_kind(source),
            _ => ErrorKind::Validation,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<DefectError> for CliError {
    fn from(e: DefectError) -> Self {
        match e {
            DefectError::Crystal(c) => c.into(),
            DefectError::Record(_) => Self::new(ErrorKind::Parse, e.to_string()),
            other => Self::validation(other.to_string()),
        }
    }
}

impl From<BzError> for CliError {
    fn from(e: BzError) -> Self {
        let kind = match e {
            BzError::Parse { .. } => ErrorKind::Parse,
            _ => ErrorKind::Validation,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        let kind = match &e {
            SpectraError::Parse { .. } | SpectraError::Structure { .. } | SpectraError::Log { .. } => ErrorKind::Parse,
            SpectraError::Io { source, .. } => io_kind(source),
            _ => ErrorKind::Validation,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Spectra(s) => s.into(),
            ModelError::Parse(_) => Self::new(ErrorKind::Parse, e.to_string()),
            ModelError::NonHermitian { .. } => Self::new(ErrorKind::Internal, e.to_string()),
            other => Self::validation(other.to_string()),
        }
    }
}

impl From<EnergeticsError> for CliError {
    fn from(e: EnergeticsError) -> Self {
        let kind = match &e {
            EnergeticsError::Parse { .. } => ErrorKind::Parse,
            EnergeticsError::Io { source, .. } => io_kind(source),
            _ => ErrorKind::Validation,
        };
        Self::new(kind, e.to_string())
    }
}

impl From<DeckError> for CliError {
    fn from(e: DeckError) -> Self {
        Self::validation(e.to_string())
    }
}
