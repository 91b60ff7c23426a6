//! Plain-text eigenvalue files.
//!
//! ```text
//! # nk=2 nbands=3 electrons=2 spin=2 units=eV
//! k 1 0 0 0 0.5 0
//!   -1.0 0.5 2.0
//! k 2 0.5 0 0 0.5 0.84
//!   -0.9 0.6
//!   2.1
//! ```
//!
//! Eigenvalues may wrap over any number of lines. `#` starts a comment
//! anywhere. The optional 7th field on a `k` line is the path distance.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{EigenvalueSet, KSample, Result, SpectraError};
use crate::numfmt::fmt_num;

const PER_LINE: usize = 6;

struct Header {
    nk: usize,
    nbands: usize,
    electrons: u32,
    spin: u8,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> SpectraError {
    SpectraError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_header(comment: &str, line: usize) -> Result<Option<Header>> {
    if !comment.contains("nk=") {
        return Ok(None);
    }
    let (mut nk, mut nbands, mut electrons, mut spin) = (None, None, None, None);
    for tok in comment.split_whitespace() {
        let Some((key, value)) = tok.split_once('=') else {
            continue;
        };
        let bad = || parse_err(line, 1, format!("bad header value '{tok}'"));
        match key {
            "nk" => nk = Some(value.parse().map_err(|_| bad())?),
            "nbands" => nbands = Some(value.parse().map_err(|_| bad())?),
            "electrons" => electrons = Some(value.parse().map_err(|_| bad())?),
            "spin" => spin = Some(value.parse().map_err(|_| bad())?),
            "units" if value != "eV" => {
                return Err(parse_err(line, 1, format!("unsupported units '{value}' (expected eV)")))
            }
            _ => {}
        }
    }
    match (nk, nbands, electrons, spin) {
        (Some(nk), Some(nbands), Some(electrons), Some(spin)) => Ok(Some(Header {
            nk,
            nbands,
            electrons,
            spin,
        })),
        _ => Err(parse_err(line, 1, "header needs nk=, nbands=, electrons= and spin=")),
    }
}

pub fn parse_eigenvalues(text: &str) -> Result<EigenvalueSet> {
    let mut header: Option<Header> = None;
    let mut reference = None;
    let mut kpoints: Vec<KSample> = Vec::new();
    let mut bands: Vec<Vec<f64>> = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let (body, comment) = match raw.find('#') {
            Some(p) => (&raw[..p], Some(&raw[p + 1..])),
            None => (raw, None),
        };
        if let Some(c) = comment {
            if header.is_none() {
                header = parse_header(c, line)?;
            }
            if let Some(r) = c.trim().strip_prefix("reference:") {
                reference = Some(r.trim().to_string());
            }
        }
        let mut tokens = tokenize(body).peekable();
        let Some(&(col, first)) = tokens.peek() else {
            continue;
        };
        if first == "k" {
            if header.is_none() {
                return Err(parse_err(line, col, "k record before the '# nk=...' header"));
            }
            tokens.next();
            let fields: Vec<(usize, &str)> = tokens.collect();
            if fields.len() != 5 && fields.len() != 6 {
                return Err(parse_err(
                    line,
                    col,
                    format!(
                        "k line needs index, 3 coordinates, weight and optional s; found {} fields",
                        fields.len()
                    ),
                ));
            }
            let (icol, itok) = fields[0];
            let index: usize = itok
                .parse()
                .map_err(|_| parse_err(line, icol, format!("bad k index '{itok}'")))?;
            if index != kpoints.len() + 1 {
                return Err(SpectraError::Structure {
                    k_index: index,
                    message: format!("expected k index {}", kpoints.len() + 1),
                });
            }
            let nums = fields[1..]
                .iter()
                .map(|&(c, t)| number(t, line, c))
                .collect::<Result<Vec<f64>>>()?;
            kpoints.push(KSample {
                frac: [nums[0], nums[1], nums[2]],
                weight: nums[3],
                s: nums.get(4).copied(),
            });
            bands.push(Vec::new());
        } else {
            let row = bands
                .last_mut()
                .ok_or_else(|| parse_err(line, col, "eigenvalues before the first k line"))?;
            for (c, t) in tokens {
                row.push(number(t, line, c)?);
            }
        }
    }

    let h = header.ok_or_else(|| parse_err(1, 1, "missing '# nk=... nbands=... electrons=... spin=...' header"))?;
    for (k, row) in bands.iter().enumerate() {
        if row.len() != h.nbands {
            return Err(SpectraError::Structure {
                k_index: k + 1,
                message: format!("{} eigenvalues, expected {}", row.len(), h.nbands),
            });
        }
    }
    if kpoints.len() != h.nk {
        return Err(SpectraError::Structure {
            k_index: kpoints.len(),
            message: format!("file has {} k-points, header says {}", kpoints.len(), h.nk),
        });
    }
    let mut set = EigenvalueSet::new(kpoints, bands, h.electrons, h.spin)?;
    set.reference = reference;
    Ok(set)
}

fn tokenize(s: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut pos = 0;
    s.split_whitespace().map(move |tok| {
        let start = s[pos..].find(tok).map_or(pos, |p| p + pos);
        pos = start + tok.len();
        (start + 1, tok)
    })
}

fn number(tok: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, column, format!("non-numeric token '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, column, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

pub fn read_eigenvalues(path: impl AsRef<Path>) -> Result<EigenvalueSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SpectraError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_eigenvalues(&text)
}

pub fn write_eigenvalues(set: &EigenvalueSet) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# nk={} nbands={} electrons={} spin={} units=eV",
        set.nk(),
        set.nbands(),
        set.electrons,
        set.spin_degeneracy
    );
    if let Some(r) = &set.reference {
        let _ = writeln!(out, "# reference: {r}");
    }
    for (i, (k, row)) in set.kpoints.iter().zip(&set.bands).enumerate() {
        let _ = write!(
            out,
            "k {} {} {} {} {}",
            i + 1,
            fmt_num(k.frac[0]),
            fmt_num(k.frac[1]),
            fmt_num(k.frac[2]),
            fmt_num(k.weight)
        );
        if let Some(s) = k.s {
            let _ = write!(out, " {}", fmt_num(s));
        }
        out.push('\n');
        for chunk in row.chunks(PER_LINE) {
            let line: Vec<String> = chunk.iter().map(|e| fmt_num(*e)).collect();
            let _ = writeln!(out, "  {}", line.join(" "));
        }
    }
    out
}
