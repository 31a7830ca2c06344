//! Plain bisection, chosen for robustness over speed.

use crate::error::{Error, Result};
use crate::optimizer::RootFindResult;

/// Hard iteration cap; generous next to the ~50 iterations float exhaustion
/// takes on any bracket this crate uses.
const MAX_ITERATIONS: u32 = 200;

/// Bisection root of `f` on `[lo, hi]`.
///
/// Halving stops once the bracket is narrower than `tol_x`, the midpoint
/// stops moving (float exhaustion), an exact zero is hit, or the iteration
/// cap is reached; `tol_x = 0` runs to exhaustion. `context` names the
/// caller's claim in the bracket-failure message, since for every bracket
/// in this crate a missing sign change means a certified inequality broke,
/// not that tuning is off.
pub(crate) fn bisect(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol_x: f64,
    context: &str,
) -> Result<RootFindResult> {
    debug_assert!(lo <= hi);
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return Ok(RootFindResult {
            x: lo,
            residual: 0.0,
            iterations: 0,
            bracket: (lo, hi),
        });
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return Ok(RootFindResult {
            x: hi,
            residual: 0.0,
            iterations: 0,
            bracket: (lo, hi),
        });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BracketFailure {
            context: context.to_string(),
            lo,
            hi,
        });
    }

    let (mut lo, mut hi) = (lo, hi);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && hi - lo >= tol_x {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break; // bracket narrower than one ulp
        }
        iterations += 1;
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(RootFindResult {
                x: mid,
                residual: 0.0,
                iterations,
                bracket: (lo, hi),
            });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = lo + (hi - lo) / 2.0;
    Ok(RootFindResult {
        x,
        residual: f(x),
        iterations,
        bracket: (lo, hi),
    })
}
