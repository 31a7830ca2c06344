//! Evaluation grids with exact endpoints.
//!
//! Verification sweeps are log-spaced near zero, where the certified
//! margins vanish like powers of `p`, and linearly spaced elsewhere. Both
//! constructors pin the first and last entries to the requested bounds
//! exactly, so insetting an open interval by 1e-9 at the call site is not
//! eroded by interpolation roundoff.

use crate::error::{Error, Result};

/// `count` points from `lo` to `hi` inclusive, equally spaced in log scale.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain(format!(
            "log grid needs 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    if count < 2 {
        return Err(Error::domain("grid needs at least 2 points"));
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let step = (ln_hi - ln_lo) / (count - 1) as f64;
    let mut pts: Vec<f64> = (0..count)
        .map(|i| (ln_lo + i as f64 * step).exp())
        .collect();
    pts[0] = lo;
    pts[count - 1] = hi;
    Ok(pts)
}

/// `count` points from `lo` to `hi` inclusive, equally spaced.
pub fn linear(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain(format!(
            "linear grid needs lo < hi, got [{lo}, {hi}]"
        )));
    }
    if count < 2 {
        return Err(Error::domain("grid needs at least 2 points"));
    }
    let step = (hi - lo) / (count - 1) as f64;
    let mut pts: Vec<f64> = (0..count).map(|i| lo + i as f64 * step).collect();
    pts[0] = lo;
    pts[count - 1] = hi;
    Ok(pts)
}
