//! Optimal group sizes by three routes: brute-force scan (the oracle),
//! closed-form candidate sets, and the continuous minimizer located by
//! root-finding on the cost derivative.
//!
//! The closed-form candidates are
//!
//! ```text
//! D  : { floor(sqrt(1/p)),  floor(sqrt(1/p)) + 1 }
//! D0 : { floor(sqrt(1/p)) + 1,  floor(sqrt(1/p)) + 2 }
//! S  : { floor(sqrt(2/p)),  +1 }        for p > p*
//!      { floor(sqrt(2/p)),  +1,  +2 }   for p <= p*
//! ```
//!
//! valid below the pooling cut-offs (`(3 - sqrt(5))/2` for D and S, Samuels'
//! `1 - (1/3)^(1/3)` for D0); at or above the cut-off the optimal group is a
//! single item. `p*` is the prevalence where the Sterrett candidate window
//! shifts — the unique unit crossing of the auxiliary function `g_0`, about
//! 0.17113 — computed once per process by [`crate::verifier::p_star`]. Brute
//! force over `1..=n_max` is kept deliberately dumb so it can arbitrate:
//! agreement between the two routes on a dense grid is the numerical content
//! of the candidate-set claims, and the verifier tests exactly that.

use std::fmt;

use serde::Serialize;

use crate::bisect::bisect;
use crate::error::{Error, Result};
use crate::schemes::{
    cost_derivative_in_n, cost_per_item, samuels_cutoff, ungar_cutoff, Prevalence, SchemeId,
};
use crate::verifier;

/// How an [`OptimalConfig`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizationMethod {
    BruteForce,
    ClosedForm,
}

impl fmt::Display for OptimizationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizationMethod::BruteForce => "brute_force",
            OptimizationMethod::ClosedForm => "closed_form",
        })
    }
}

/// An optimal group size together with the candidate set it was chosen from.
///
/// `n_opt` is always a member of `candidates`, `t_opt` its exact
/// per-item cost, and ties between equally cheap candidates resolve to the
/// smaller group.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalConfig {
    pub scheme: SchemeId,
    pub p: f64,
    pub n_opt: u64,
    pub t_opt: f64,
    /// Ascending, non-empty; the full scan range for brute force.
    pub candidates: Vec<u64>,
    pub method: OptimizationMethod,
}

/// Outcome of a bisection run: located zero, the function value there, and
/// the final bracket (which always contains `x`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RootFindResult {
    pub x: f64,
    pub residual: f64,
    pub iterations: u32,
    pub bracket: (f64, f64),
}

/// Default brute-force scan cap: `max(64, ceil(4 sqrt(2/p)))`, several times
/// past either scheme's optimum.
pub fn default_scan_cap(p: Prevalence) -> u64 {
    64_u64.max((4.0 * (2.0 / p.p()).sqrt()).ceil() as u64)
}

/// Smallest minimizer of the per-item cost over `1..=n_max` (default cap
/// [`default_scan_cap`]).
///
/// The cap must not bind: if the argmin lands on `n_max` itself the scan was
/// truncated and the result would be untrustworthy, so that case is an error
/// rather than an answer.
pub fn optimal_group_size_bruteforce(
    scheme: SchemeId,
    p: Prevalence,
    n_max: Option<u64>,
) -> Result<OptimalConfig> {
    let cap = match n_max {
        Some(0) => return Err(Error::domain("scan cap must be at least 1")),
        Some(cap) => cap,
        None => default_scan_cap(p),
    };
    let mut n_opt = 1_u64;
    let mut t_opt = cost_per_item(scheme, 1, p)?;
    for n in 2..=cap {
        let t = cost_per_item(scheme, n, p)?;
        if t < t_opt {
            n_opt = n;
            t_opt = t;
        }
    }
    if n_opt == cap {
        return Err(Error::CapBinding { n_max: cap });
    }
    Ok(OptimalConfig {
        scheme,
        p: p.p(),
        n_opt,
        t_opt,
        candidates: (1..=cap).collect(),
        method: OptimizationMethod::BruteForce,
    })
}

/// Optimal group size from the closed-form candidate sets, with `p*` taken
/// from the process-wide cache.
pub fn optimal_group_size_closed_form(scheme: SchemeId, p: Prevalence) -> Result<OptimalConfig> {
    optimal_group_size_closed_form_with_p_star(scheme, p, verifier::p_star()?)
}

/// [`optimal_group_size_closed_form`] with an injected `p*`, for callers
/// that want to pin the exact threshold used.
pub fn optimal_group_size_closed_form_with_p_star(
    scheme: SchemeId,
    p: Prevalence,
    p_star: f64,
) -> Result<OptimalConfig> {
    let cutoff = match scheme {
        SchemeId::D0 => samuels_cutoff(),
        SchemeId::D | SchemeId::S => ungar_cutoff(),
    };
    let candidates: Vec<u64> = if p.p() >= cutoff {
        vec![1]
    } else {
        match scheme {
            SchemeId::D => {
                let base = (1.0 / p.p()).sqrt().floor() as u64;
                vec![base, base + 1]
            }
            SchemeId::D0 => {
                let base = (1.0 / p.p()).sqrt().floor() as u64;
                vec![base + 1, base + 2]
            }
            SchemeId::S => {
                let base = (2.0 / p.p()).sqrt().floor() as u64;
                if p.p() > p_star {
                    vec![base, base + 1]
                } else {
                    vec![base, base + 1, base + 2]
                }
            }
        }
    };
    let mut n_opt = candidates[0];
    let mut t_opt = cost_per_item(scheme, n_opt, p)?;
    for &n in &candidates[1..] {
        let t = cost_per_item(scheme, n, p)?;
        if t < t_opt {
            n_opt = n;
            t_opt = t;
        }
    }
    Ok(OptimalConfig {
        scheme,
        p: p.p(),
        n_opt,
        t_opt,
        candidates,
        method: OptimizationMethod::ClosedForm,
    })
}

/// Zero of the cost derivative — the real-valued optimal group size — for
/// schemes D and S, by bisection on the certified brackets
///
/// ```text
/// D : [ sqrt(1/p) - p,  sqrt(1/p) + 1 - (5/2) p ]
/// S : [ max(1, sqrt(2/p) - 1),  sqrt(2/p) + 1 ]
/// ```
///
/// Requires `p` below the pooling cut-off `(3 - sqrt(5))/2`. A missing sign
/// change on the bracket would contradict the bracing inequalities and is
/// surfaced as [`Error::BracketFailure`]; no global search is attempted.
pub fn continuous_minimizer(scheme: SchemeId, p: Prevalence) -> Result<RootFindResult> {
    if p.p() >= ungar_cutoff() {
        return Err(Error::domain(format!(
            "continuous minimizer needs p below the pooling cut-off {:.6}, got {}",
            ungar_cutoff(),
            p.p()
        )));
    }
    let (lo, hi) = match scheme {
        SchemeId::D0 => {
            return Err(Error::UnsupportedScheme {
                scheme,
                operation: "continuous_minimizer",
            })
        }
        SchemeId::D => {
            let s = (1.0 / p.p()).sqrt();
            (s - p.p(), s + 1.0 - 2.5 * p.p())
        }
        SchemeId::S => {
            let s = (2.0 / p.p()).sqrt();
            ((s - 1.0).max(1.0), s + 1.0)
        }
    };
    let context = format!("bracing the {scheme} minimizer at p = {}", p.p());
    bisect(
        |n| cost_derivative_in_n(scheme, n, p).expect("bracket keeps n >= 1"),
        lo,
        hi,
        1e-10,
        &context,
    )
}

/// Cost ratio `t_D(n_opt_D, p) / t_S(n_opt_S, p)` at the brute-force optima;
/// tends to `sqrt(2)` as `p` gets small. Requires `p` below the pooling
/// cut-off.
pub fn optimal_cost_ratio(p: Prevalence) -> Result<f64> {
    if p.p() >= ungar_cutoff() {
        return Err(Error::domain(format!(
            "cost ratio is defined for p below the pooling cut-off {:.6}, got {}",
            ungar_cutoff(),
            p.p()
        )));
    }
    let d = optimal_group_size_bruteforce(SchemeId::D, p, None)?;
    let s = optimal_group_size_bruteforce(SchemeId::S, p, None)?;
    Ok(d.t_opt / s.t_opt)
}
