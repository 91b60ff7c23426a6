//! SCF convergence logs: one `iter <n> dE <value> Ry` line per iteration.

use serde::Serialize;

use super::{units::RY_TO_EV, Result, SpectraError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScfStep {
    pub iteration: usize,
    /// Energy difference to the previous iteration, Ry.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Iteration at which convergence was declared, or the last logged one.
    pub iterations: usize,
    pub residuals: Vec<f64>,
    /// Residual at `iterations`, Ry.
    pub final_residual: f64,
    pub threshold: f64,
    pub max_iterations: usize,
    pub converged: bool,
}

impl ConvergenceReport {
    pub fn final_residual_ev(&self) -> f64 {
        self.final_residual * RY_TO_EV
    }
}

pub fn parse_convergence_log(text: &str) -> Result<Vec<ScfStep>> {
    let mut steps: Vec<ScfStep> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let bad = |message: String| SpectraError::Log { line, message };
        let [kw, it, de, value, unit] = toks.as_slice() else {
            return Err(bad(format!("expected 'iter <n> dE <value> Ry', found '{body}'")));
        };
        if *kw != "iter" || *de != "dE" || *unit != "Ry" {
            return Err(bad(format!("expected 'iter <n> dE <value> Ry', found '{body}'")));
        }
        let iteration: usize = it.parse().map_err(|_| bad(format!("bad iteration number '{it}'")))?;
        let residual: f64 = value.parse().map_err(|_| bad(format!("bad residual '{value}'")))?;
        if let Some(prev) = steps.last() {
            if iteration <= prev.iteration {
                return Err(bad(format!(
                    "iteration {iteration} does not follow {} (non-monotone numbering)",
                    prev.iteration
                )));
            }
        }
        steps.push(ScfStep { iteration, residual });
    }
    if steps.is_empty() {
        return Err(SpectraError::EmptyLog);
    }
    Ok(steps)
}

/// Converged iff some iteration ≤ `max_iterations` has |dE| strictly below
/// `threshold` (Ry).
pub fn audit_convergence(log: &str, threshold: f64, max_iterations: usize) -> Result<ConvergenceReport> {
    let steps = parse_convergence_log(log)?;
    let hit = steps
        .iter()
        .find(|s| s.iteration <= max_iterations && s.residual.abs() < threshold);
    let end = hit.unwrap_or_else(|| steps.last().expect("non-empty"));
    Ok(ConvergenceReport {
        iterations: end.iteration,
        residuals: steps.iter().map(|s| s.residual).collect(),
        final_residual: end.residual.abs(),
        threshold,
        max_iterations,
        converged: hit.is_some(),
    })
}
