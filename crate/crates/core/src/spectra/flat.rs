use serde::Serialize;

use super::{EigenvalueSet, Result, SpectraError};

/// A band whose dispersion across the sampled k-points is below threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatBand {
    pub band: usize,
    pub mean: f64,
    pub bandwidth: f64,
}

/// Flags band `n` when `max_k ε − min_k ε < delta` and its k-averaged
/// energy lies strictly inside `window`.
pub fn detect_flat_bands(set: &EigenvalueSet, window: (f64, f64), delta: f64) -> Result<Vec<FlatBand>> {
    if !(delta > 0.0) {
        return Err(SpectraError::BadDelta(delta));
    }
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(SpectraError::EmptyWindow(lo, hi));
    }
    let nk = set.nk() as f64;
    let mut flagged = Vec::new();
    for n in 0..set.nbands() {
        let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for e in set.band(n) {
            min = min.min(e);
            max = max.max(e);
            sum += e;
        }
        let bandwidth = max - min;
        let mean = sum / nk;
        if bandwidth < delta && mean > lo && mean < hi {
            flagged.push(FlatBand {
                band: n,
                mean,
                bandwidth,
            });
        }
    }
    Ok(flagged)
}
