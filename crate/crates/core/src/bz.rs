//! Reciprocal lattice and high-symmetry paths through the hexagonal zone.
//!
//! Reciprocal vectors follow the 2π convention, bᵢ·aⱼ = 2πδᵢⱼ, so Cartesian
//! k and path distances are in Å⁻¹.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::crystal::LatticeCell;
use crate::numfmt::fmt_num;

#[derive(Debug, Error)]
pub enum BzError {
    #[error("singular lattice matrix (determinant {0})")]
    Singular(f64),
    #[error("unknown high-symmetry label '{0}'")]
    UnknownLabel(String),
    #[error("a path needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("{total} points cannot hold {vertices} vertices")]
    TooFewPoints { total: usize, vertices: usize },
    #[error("consecutive vertices {0} and {1} coincide (zero-length segment)")]
    ZeroSegment(String, String),
    #[error("k-path parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = BzError> = std::result::Result<T, E>;

/// Reciprocal lattice; rows are b₁, b₂, b₃ in Å⁻¹.
pub fn reciprocal_lattice(cell: &LatticeCell) -> Result<Matrix3<f64>> {
    let a = cell.matrix();
    let det = a.determinant();
    let scale: f64 = a.row_iter().map(|r| r.norm()).product();
    if !(det.abs() > 1e-12 * scale) {
        return Err(BzError::Singular(det));
    }
    let inv = a.try_inverse().ok_or(BzError::Singular(det))?;
    Ok(inv.transpose() * TAU)
}

/// High-symmetry points of the hexagonal zone in reciprocal fractional
/// coordinates, in the order Γ, M, K, A, L, H.
pub fn hex_high_symmetry_points() -> [(&'static str, [f64; 3]); 6] {
    [
        ("G", [0.0, 0.0, 0.0]),
        ("M", [0.5, 0.0, 0.0]),
        ("K", [1.0 / 3.0, 1.0 / 3.0, 0.0]),
        ("A", [0.0, 0.0, 0.5]),
        ("L", [0.5, 0.0, 0.5]),
        ("H", [1.0 / 3.0, 1.0 / 3.0, 0.5]),
    ]
}

/// Canonical label ("G" for Γ) for any accepted spelling.
pub fn canonical_label(label: &str) -> Option<&'static str> {
    let l = label.trim();
    let canon = match l {
        "Γ" | "G" | "Gamma" | "GAMMA" | "gamma" | "g" => "G",
        _ => {
            let up = l.to_ascii_uppercase();
            return hex_high_symmetry_points().iter().map(|(n, _)| *n).find(|n| *n == up);
        }
    };
    Some(canon)
}

pub fn high_symmetry_point(label: &str) -> Result<[f64; 3]> {
    let canon = canonical_label(label).ok_or_else(|| BzError::UnknownLabel(label.to_string()))?;
    Ok(hex_high_symmetry_points()
        .iter()
        .find(|(n, _)| *n == canon)
        .map(|(_, f)| *f)
        .expect("canonical labels are in the table"))
}

/// Display form of a label (Γ instead of G).
pub fn pretty_label(label: &str) -> &str {
    if label == "G" {
        "Γ"
    } else {
        label
    }
}

/// The default hexagonal path Γ-M-K-Γ-A-L-H-A.
pub const HEX_PATH: [&str; 8] = ["G", "M", "K", "G", "A", "L", "H", "A"];

/// Splits "G-M-K-G" (also accepts commas or spaces) into labels.
pub fn parse_path_labels(spec: &str) -> Vec<String> {
    spec.split(|c: char| c == '-' || c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KPoint {
    pub frac: [f64; 3],
    pub cart: [f64; 3],
    pub label: Option<String>,
    /// Cumulative path distance, Å⁻¹.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KPath {
    pub points: Vec<KPoint>,
    pub vertices: Vec<String>,
    /// Number of steps (point-to-point intervals) on each segment.
    pub segment_steps: Vec<usize>,
    /// Rows b₁, b₂, b₃ used for the Cartesian coordinates.
    pub reciprocal: [[f64; 3]; 3],
}

fn to_cart(b: &Matrix3<f64>, frac: [f64; 3]) -> [f64; 3] {
    (b.transpose() * Vector3::from(frac)).into()
}

/// Splits `extra` items over `weights` by largest remainder; ties in the
/// remainder go to the lower index.
pub fn largest_remainder(weights: &[f64], extra: usize) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| extra as f64 * w / total).collect();
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = quotas[i] - alloc[i] as f64;
        let rj = quotas[j] - alloc[j] as f64;
        rj.partial_cmp(&ri).unwrap().then(i.cmp(&j))
    });
    for &i in order.iter().take(extra.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

/// Builds a path with exactly `total_points` points. Each vertex appears
/// once; every segment gets one step and the remaining `total − vertices`
/// steps are spread in proportion to the Cartesian segment lengths.
pub fn build_kpath<S: AsRef<str>>(cell: &LatticeCell, labels: &[S], total_points: usize) -> Result<KPath> {
    if labels.len() < 2 {
        return Err(BzError::TooFewVertices(labels.len()));
    }
    if total_points < labels.len() {
        return Err(BzError::TooFewPoints {
            total: total_points,
            vertices: labels.len(),
        });
    }
    let b = reciprocal_lattice(cell)?;
    let mut vertices = Vec::with_capacity(labels.len());
    let mut fracs = Vec::with_capacity(labels.len());
    for l in labels {
        let l = l.as_ref();
        fracs.push(high_symmetry_point(l)?);
        vertices.push(canonical_label(l).expect("validated above").to_string());
    }
    let lengths: Vec<f64> = fracs
        .windows(2)
        .map(|w| {
            let d: Vector3<f64> = Vector3::from(to_cart(&b, w[1])) - Vector3::from(to_cart(&b, w[0]));
            d.norm()
        })
        .collect();
    for (i, len) in lengths.iter().enumerate() {
        if *len == 0.0 {
            return Err(BzError::ZeroSegment(vertices[i].clone(), vertices[i + 1].clone()));
        }
    }
    let segment_steps: Vec<usize> = largest_remainder(&lengths, total_points - labels.len())
        .into_iter()
        .map(|x| x + 1)
        .collect();

    let mut points = Vec::with_capacity(total_points);
    for (seg, &steps) in segment_steps.iter().enumerate() {
        let (f0, f1) = (fracs[seg], fracs[seg + 1]);
        for i in 0..steps {
            let frac = if i == 0 {
                f0
            } else {
                let t = i as f64 / steps as f64;
                std::array::from_fn(|d| f0[d] + (f1[d] - f0[d]) * t)
            };
            points.push(KPoint {
                frac,
                cart: to_cart(&b, frac),
                label: (i == 0).then(|| vertices[seg].clone()),
                s: 0.0,
            });
        }
    }
    let last = *fracs.last().unwrap();
    points.push(KPoint {
        frac: last,
        cart: to_cart(&b, last),
        label: vertices.last().cloned(),
        s: 0.0,
    });
    accumulate_distance(&mut points);

    Ok(KPath {
        points,
        vertices,
        segment_steps,
        reciprocal: matrix_rows(&b),
    })
}

fn matrix_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn accumulate_distance(points: &mut [KPoint]) {
    let mut s = 0.0;
    for i in 0..points.len() {
        if i > 0 {
            let d = Vector3::from(points[i].cart) - Vector3::from(points[i - 1].cart);
            s += d.norm();
        }
        points[i].s = s;
    }
}

impl KPath {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of the vertex points along the path.
    pub fn vertex_indices(&self) -> Vec<usize> {
        let mut idx = vec![0];
        let mut acc = 0;
        for steps in &self.segment_steps {
            acc += steps;
            idx.push(acc);
        }
        idx
    }

    /// (label, s) of every vertex, for plot ticks.
    pub fn ticks(&self) -> Vec<(String, f64)> {
        self.vertex_indices()
            .into_iter()
            .zip(&self.vertices)
            .map(|(i, l)| (l.clone(), self.points[i].s))
            .collect()
    }
}

/// Serializes a path: reciprocal-lattice header, vertex header, then one
/// record per point (index, frac, s, optional label).
pub fn write_kpath(path: &KPath) -> String {
    let mut out = String::new();
    out.push_str("# k-path  units=1/angstrom  convention=2pi (b_i . a_j = 2 pi delta_ij)\n");
    for (i, row) in path.reciprocal.iter().enumerate() {
        let _ = writeln!(
            out,
            "# b{} {} {} {}",
            i + 1,
            fmt_num(row[0]),
            fmt_num(row[1]),
            fmt_num(row[2])
        );
    }
    out.push_str("# label frac_x frac_y frac_z\n");
    for (label, idx) in path.vertices.iter().zip(path.vertex_indices()) {
        let f = path.points[idx].frac;
        let _ = writeln!(out, "# {} {} {} {}", label, fmt_num(f[0]), fmt_num(f[1]), fmt_num(f[2]));
    }
    let _ = writeln!(
        out,
        "# points={} steps={}",
        path.points.len(),
        join(&path.segment_steps)
    );
    out.push_str("# index frac_x frac_y frac_z s label\n");
    for (i, p) in path.points.iter().enumerate() {
        let _ = write!(
            out,
            "{} {} {} {} {}",
            i,
            fmt_num(p.frac[0]),
            fmt_num(p.frac[1]),
            fmt_num(p.frac[2]),
            fmt_num(p.s)
        );
        if let Some(l) = &p.label {
            let _ = write!(out, " {l}");
        }
        out.push('\n');
    }
    out
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses the output of [`write_kpath`].
pub fn read_kpath(text: &str) -> Result<KPath> {
    let mut recip: [Option<[f64; 3]>; 3] = [None; 3];
    let mut vertices = Vec::new();
    let mut steps: Option<Vec<usize>> = None;
    let mut points = Vec::new();
    let err = |line: usize, message: String| BzError::Parse { line, message };
    let floats = |line: usize, toks: &[&str]| -> Result<Vec<f64>> {
        toks.iter()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| err(line, format!("expected a number, found '{t}'")))
            })
            .collect()
    };

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let toks: Vec<&str> = comment.split_whitespace().collect();
            match toks.as_slice() {
                [b, x, y, z] if b.len() == 2 && b.starts_with('b') && b[1..].parse::<usize>().is_ok() => {
                    let i: usize = b[1..].parse().unwrap();
                    if !(1..=3).contains(&i) {
                        return Err(err(line, format!("bad reciprocal row '{b}'")));
                    }
                    let v = floats(line, &[x, y, z])?;
                    recip[i - 1] = Some([v[0], v[1], v[2]]);
                }
                [label, x, y, z] if canonical_label(label).is_some() => {
                    if let Ok(v) = floats(line, &[x, y, z]) {
                        vertices.push((canonical_label(label).unwrap().to_string(), [v[0], v[1], v[2]]));
                    }
                }
                [p, s] if p.starts_with("points=") && s.starts_with("steps=") => {
                    let parsed: std::result::Result<Vec<usize>, _> =
                        s["steps=".len()..].split(',').map(str::parse).collect();
                    steps = Some(parsed.map_err(|_| err(line, format!("bad steps list '{s}'")))?);
                }
                _ => {}
            }
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() < 5 || toks.len() > 6 {
            return Err(err(line, format!("expected 5 or 6 fields, found {}", toks.len())));
        }
        let index: usize = toks[0]
            .parse()
            .map_err(|_| err(line, format!("bad point index '{}'", toks[0])))?;
        if index != points.len() {
            return Err(err(line, format!("point index {index} out of sequence")));
        }
        let v = floats(line, &toks[1..5])?;
        let label = match toks.get(5) {
            Some(l) => Some(
                canonical_label(l)
                    .ok_or_else(|| err(line, format!("unknown label '{l}'")))?
                    .to_string(),
            ),
            None => None,
        };
        points.push(KPoint {
            frac: [v[0], v[1], v[2]],
            cart: [0.0; 3],
            label,
            s: v[3],
        });
    }

    let rows: Vec<[f64; 3]> = recip
        .iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| err(0, format!("missing reciprocal row b{}", i + 1))))
        .collect::<Result<_>>()?;
    let b = Matrix3::from_row_slice(&rows.concat());
    for p in &mut points {
        p.cart = to_cart(&b, p.frac);
    }
    if points.len() < 2 {
        return Err(err(0, "a path needs at least 2 points".into()));
    }
    let segment_steps = match steps {
        Some(s) => s,
        None => {
            // recover from labelled points
            let idx: Vec<usize> = points
                .iter()
                .enumerate()
                .filter(|(_, p)| p.label.is_some())
                .map(|(i, _)| i)
                .collect();
            idx.windows(2).map(|w| w[1] - w[0]).collect()
        }
    };
    if segment_steps.iter().sum::<usize>() + 1 != points.len() {
        return Err(err(0, "segment steps do not add up to the point count".into()));
    }
    let vertex_labels = if vertices.is_empty() {
        points.iter().filter_map(|p| p.label.clone()).collect()
    } else {
        vertices.into_iter().map(|(l, _)| l).collect()
    };
    Ok(KPath {
        points,
        vertices: vertex_labels,
        segment_steps,
        reciprocal: matrix_rows(&b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell() -> LatticeCell {
        LatticeCell::hexagonal(3.09, 10.08).unwrap()
    }

    #[test]
    fn reciprocal_is_biorthogonal() {
        let c = cell();
        let b = reciprocal_lattice(&c).unwrap();
        let prod = b * c.matrix().transpose();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { TAU } else { 0.0 };
                assert!((prod[(i, j)] - want).abs() < 1e-10);
            }
        }
        assert!((b.row(2).norm() - TAU / 10.08).abs() < 1e-12);
    }

    #[test]
    fn cubic_reciprocal() {
        let l = 4.0;
        let c = LatticeCell::from_vectors([[l, 0.0, 0.0], [0.0, l, 0.0], [0.0, 0.0, l]]).unwrap();
        let b = reciprocal_lattice(&c).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { TAU / l } else { 0.0 };
                assert!((b[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn high_symmetry_table() {
        let pts = hex_high_symmetry_points();
        assert_eq!(high_symmetry_point("Γ").unwrap(), [0.0; 3]);
        let k = high_symmetry_point("K").unwrap();
        let h = high_symmetry_point("H").unwrap();
        assert_eq!([k[0], k[1]], [h[0], h[1]]);
        assert_eq!(h[2] - k[2], 0.5);
        assert_eq!(high_symmetry_point("A").unwrap(), [0.0, 0.0, 0.5]);
        assert_eq!(pts.len(), 6);
        assert!(matches!(high_symmetry_point("X"), Err(BzError::UnknownLabel(_))));
    }

    #[test]
    fn minimal_path() {
        let p = build_kpath(&cell(), &["G", "M"], 2).unwrap();
        assert_eq!(p.points.len(), 2);
        assert_eq!(p.points[0].frac, [0.0; 3]);
        assert_eq!(p.points[1].frac, [0.5, 0.0, 0.0]);
        assert_eq!(p.points[0].s, 0.0);
    }

    #[test]
    fn path_errors() {
        assert!(matches!(
            build_kpath(&cell(), &["G"], 5),
            Err(BzError::TooFewVertices(1))
        ));
        assert!(matches!(
            build_kpath(&cell(), &["G", "M", "K"], 2),
            Err(BzError::TooFewPoints { .. })
        ));
        assert!(matches!(
            build_kpath(&cell(), &["G", "Q"], 10),
            Err(BzError::UnknownLabel(l)) if l == "Q"
        ));
        assert!(matches!(
            build_kpath(&cell(), &["G", "G"], 10),
            Err(BzError::ZeroSegment(..))
        ));
    }

    #[test]
    fn largest_remainder_sums() {
        assert_eq!(largest_remainder(&[1.0, 1.0, 1.0], 4), vec![2, 1, 1]);
        assert_eq!(largest_remainder(&[3.0, 1.0], 0), vec![0, 0]);
    }

    #[test]
    fn file_round_trip() {
        let p = build_kpath(&cell(), &HEX_PATH, 40).unwrap();
        let text = write_kpath(&p);
        let back = read_kpath(&text).unwrap();
        assert_eq!(write_kpath(&back), text);
        assert_eq!(back.vertices, p.vertices);
        assert_eq!(back.segment_steps, p.segment_steps);
        assert!(read_kpath("# b1 1 0 0\n0 0 0 0 x\n").is_err());
    }
}
