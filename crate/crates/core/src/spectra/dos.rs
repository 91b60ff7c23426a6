//! Smeared density of states.
//!
//! DOS(E) = g · Σ_k w_k Σ_n K_σ(E − ε_nk) with a unit-area kernel K. The
//! default kernel is a Gaussian lowered by its value at 4σ, clipped there and
//! renormalized: it reaches zero continuously, so the DOS is exactly zero
//! further than 4σ from every eigenvalue and trapezoid integrals stay
//! accurate.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use super::{EigenvalueSet, Result, SpectraError};
use crate::numfmt::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Kernel {
    /// Plain unit-area Gaussian.
    Gaussian,
    /// `g(x) − g(cutoff·σ)` inside the cutoff, zero outside, rescaled to unit
    /// area.
    TruncatedGaussian { cutoff: f64 },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::TruncatedGaussian { cutoff: 4.0 }
    }
}

impl Kernel {
    fn prepare(self, sigma: f64) -> PreparedKernel {
        let root_two_pi = (2.0 * PI).sqrt();
        let (cutoff, floor, mass) = match self {
            Kernel::Gaussian => (f64::INFINITY, 0.0, 1.0),
            Kernel::TruncatedGaussian { cutoff } => {
                let edge = (-0.5 * cutoff * cutoff).exp();
                let mass = libm::erf(cutoff / SQRT_2) - 2.0 * cutoff * edge / root_two_pi;
                (cutoff * sigma, edge, mass)
            }
        };
        PreparedKernel {
            inv_two_var: 1.0 / (2.0 * sigma * sigma),
            norm: 1.0 / (sigma * root_two_pi * mass),
            floor,
            cutoff,
        }
    }
}

struct PreparedKernel {
    inv_two_var: f64,
    norm: f64,
    floor: f64,
    cutoff: f64,
}

impl PreparedKernel {
    #[inline]
    fn eval(&self, x: f64) -> f64 {
        if x.abs() >= self.cutoff {
            0.0
        } else {
            self.norm * ((-x * x * self.inv_two_var).exp() - self.floor)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DosParams {
    pub e_min: f64,
    pub e_max: f64,
    pub n_grid: usize,
    pub sigma: f64,
    pub kernel: Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DosCurve {
    pub grid: Vec<f64>,
    /// States per eV (per cell), spin degeneracy included.
    pub values: Vec<f64>,
    pub sigma: f64,
}

impl DosCurve {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.grid, &self.values)
    }

    /// Largest DOS value on grid points inside `(lo, hi)`.
    pub fn max_in(&self, lo: f64, hi: f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .filter(|(e, _)| **e > lo && **e < hi)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    let parts: Vec<f64> = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .collect();
    pairwise_sum(&parts)
}

/// DOS with the default truncated-Gaussian kernel.
pub fn compute_dos(set: &EigenvalueSet, e_min: f64, e_max: f64, n_grid: usize, sigma: f64) -> Result<DosCurve> {
    compute_dos_with(
        set,
        &DosParams {
            e_min,
            e_max,
            n_grid,
            sigma,
            kernel: Kernel::default(),
        },
    )
}

pub fn compute_dos_with(set: &EigenvalueSet, p: &DosParams) -> Result<DosCurve> {
    if !(p.sigma > 0.0) || !p.sigma.is_finite() {
        return Err(SpectraError::BadSigma(p.sigma));
    }
    if p.n_grid < 2 {
        return Err(SpectraError::BadGrid(format!(
            "need at least 2 points, got {}",
            p.n_grid
        )));
    }
    if !(p.e_min < p.e_max) {
        return Err(SpectraError::BadGrid(format!(
            "e_min {} must be below e_max {}",
            p.e_min, p.e_max
        )));
    }
    if let Kernel::TruncatedGaussian { cutoff } = p.kernel {
        if !(cutoff > 0.0) {
            return Err(SpectraError::BadGrid(format!(
                "kernel cutoff must be positive, got {cutoff}"
            )));
        }
    }
    let kernel = p.kernel.prepare(p.sigma);
    let step = (p.e_max - p.e_min) / (p.n_grid - 1) as f64;
    let grid: Vec<f64> = (0..p.n_grid).map(|i| p.e_min + i as f64 * step).collect();
    let g = f64::from(set.spin_degeneracy);

    // Each grid point is summed in a fixed order, so results do not depend
    // on how grid points are distributed over threads.
    let eval = |e: &f64| -> f64 {
        let per_k: Vec<f64> = set
            .kpoints
            .iter()
            .zip(&set.bands)
            .map(|(k, row)| k.weight * pairwise_sum(&row.iter().map(|eps| kernel.eval(e - eps)).collect::<Vec<_>>()))
            .collect();
        g * pairwise_sum(&per_k)
    };

    #[cfg(feature = "parallel")]
    let values: Vec<f64> = {
        use rayon::prelude::*;
        grid.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = grid.iter().map(eval).collect();

    Ok(DosCurve {
        grid,
        values,
        sigma: p.sigma,
    })
}
