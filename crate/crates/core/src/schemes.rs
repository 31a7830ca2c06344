//! Closed-form testing costs for the three pooling schemes.
//!
//! For a batch of `N` items with prevalence `p` (and `q = 1 - p`), the
//! expected number of tests per item is
//!
//! ```text
//! t_D0(N, p) = 1 - q^N + 1/N
//! t_D (N, p) = 1 - q^N + (1 - p q^(N-1)) / N
//! t_S (N, p) = 2 - q + (2q - (1 - q^(N+1)) / p) / N
//! ```
//!
//! All three are extended to real `N >= 1` by the same expressions; the real
//! extension feeds the derivative and the root-finding code. At `N = 1`
//! every scheme degenerates to individual testing, so the integer-argument
//! cost returns exactly 1 there. For D and S the formulas already evaluate
//! to 1 at `N = 1`; the D0 expression does not (it gives `1 + p`, a pool
//! test plus a forced retest), which is why the convention is applied up
//! front rather than left to the formula.
//!
//! Powers of `q` are evaluated as `exp(N ln q)` with `ln q = ln_1p(-p)`, and
//! `1 - q^N` as `-expm1(N ln q)`, so costs stay accurate for prevalences as
//! small as 1e-9.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

/// Scheme selector: classic Dorfman (`D0`), modified Dorfman (`D`),
/// or Sterrett (`S`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SchemeId {
    D0,
    D,
    S,
}

impl SchemeId {
    pub const ALL: [SchemeId; 3] = [SchemeId::D0, SchemeId::D, SchemeId::S];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::D0 => "D0",
            SchemeId::D => "D",
            SchemeId::S => "S",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "D0" => Ok(SchemeId::D0),
            "D" => Ok(SchemeId::D),
            "S" => Ok(SchemeId::S),
            other => Err(Error::domain(format!(
                "unknown scheme {other:?}; expected one of D0, D, S"
            ))),
        }
    }
}

/// Defect probability `p` with its derived complement `q = 1 - p` and
/// `ln q` precomputed via `ln_1p`, which keeps `q^N = exp(N ln q)` accurate
/// down to `p` around 1e-9 and below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prevalence {
    p: f64,
    q: f64,
    log_q: f64,
}

impl Prevalence {
    /// Validates `0 < p < 1`.
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 0.0 || p >= 1.0 {
            return Err(Error::domain(format!(
                "prevalence must satisfy 0 < p < 1, got {p}"
            )));
        }
        Ok(Prevalence {
            p,
            q: 1.0 - p,
            log_q: (-p).ln_1p(),
        })
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn q(self) -> f64 {
        self.q
    }

    /// `ln(1 - p)`, always negative.
    pub fn log_q(self) -> f64 {
        self.log_q
    }

    /// `q^n` for real `n`.
    pub fn pow_q(self, n: f64) -> f64 {
        (n * self.log_q).exp()
    }

    /// `1 - q^n` without cancellation for small `p`.
    pub fn one_minus_pow_q(self, n: f64) -> f64 {
        -(n * self.log_q).exp_m1()
    }
}

/// A single evaluated cost: scheme, group size, prevalence, tests per item.
///
/// `n` is integral for scan results and real-valued when it comes out of the
/// continuous analysis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CostPoint {
    pub scheme: SchemeId,
    pub n: f64,
    pub p: f64,
    pub t: f64,
}

/// Prevalence above which no pooling scheme beats individual testing:
/// `(3 - sqrt(5)) / 2`, about 0.381966.
pub fn ungar_cutoff() -> f64 {
    (3.0 - 5.0_f64.sqrt()) / 2.0
}

/// Prevalence above which classic Dorfman pooling stops paying off:
/// `1 - (1/3)^(1/3)`, about 0.306639.
pub fn samuels_cutoff() -> f64 {
    1.0 - (1.0_f64 / 3.0).cbrt()
}

/// Expected tests per item for an integer group size.
///
/// `n = 1` returns exactly 1 for every scheme (individual testing).
pub fn cost_per_item(scheme: SchemeId, n: u64, p: Prevalence) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("group size must be at least 1"));
    }
    if n == 1 {
        return Ok(1.0);
    }
    Ok(cost_real(scheme, n as f64, p))
}

/// Real-argument extension of the cost formulas, `n >= 1`.
///
/// No individual-testing convention is applied: at `n = 1` this returns the
/// raw formula value (`1 + p` for D0, 1 for D and S).
pub fn cost_per_item_real(scheme: SchemeId, n: f64, p: Prevalence) -> Result<f64> {
    if n.is_nan() || n < 1.0 {
        return Err(Error::domain(format!(
            "real group size must be at least 1, got {n}"
        )));
    }
    Ok(cost_real(scheme, n, p))
}

fn cost_real(scheme: SchemeId, n: f64, p: Prevalence) -> f64 {
    match scheme {
        SchemeId::D0 => p.one_minus_pow_q(n) + 1.0 / n,
        SchemeId::D => p.one_minus_pow_q(n) + (1.0 - p.p() * p.pow_q(n - 1.0)) / n,
        SchemeId::S => {
            2.0 - p.q() + (2.0 * p.q() - p.one_minus_pow_q(n + 1.0) / p.p()) / n
        }
    }
}

/// Convenience wrapper building a [`CostPoint`] from an integer group size.
pub fn cost_point(scheme: SchemeId, n: u64, p: Prevalence) -> Result<CostPoint> {
    Ok(CostPoint {
        scheme,
        n: n as f64,
        p: p.p(),
        t: cost_per_item(scheme, n, p)?,
    })
}

/// Exact law of the test count for scheme D, `n >= 2`.
///
/// The count takes three values: 1 (clean pool), `n` (only the last member
/// is bad, so it is inferred), and `n + 1` (everything is tested). Returned
/// as `(value, probability)` pairs in increasing value order:
///
/// ```text
/// P(T = 1)     = q^n
/// P(T = n)     = p q^(n-1)
/// P(T = n + 1) = 1 - q^n - p q^(n-1) = 1 - q^(n-1)
/// ```
pub fn tests_distribution_modified_dorfman(n: u64, p: Prevalence) -> Result<Vec<(u64, f64)>> {
    if n < 2 {
        return Err(Error::domain(
            "the three-point law needs n >= 2; at n = 1 the support collapses",
        ));
    }
    let nf = n as f64;
    Ok(vec![
        (1, p.pow_q(nf)),
        (n, p.p() * p.pow_q(nf - 1.0)),
        // q^n + p q^(n-1) = q^(n-1), so the remainder is 1 - q^(n-1).
        (n + 1, p.one_minus_pow_q(nf - 1.0)),
    ])
}

/// Derivative of the cost in the (real) group size, schemes D and S only.
///
/// ```text
/// d t_D / dN = -ln q (q^N + p q^(N-1) / N) - (1 - p q^(N-1)) / N^2
/// d t_S / dN = q^(N+1) ln q / (p N) - 2 q / N^2 + (1 - q^(N+1)) / (p N^2)
/// ```
///
/// The zero of the S derivative coincides with the fixed point of
/// `N -> 1/ln q - (1 - 2pq)/ln q * (1/q)^(N+1)`, and the zero of the D
/// derivative with the fixed point of
/// `N -> -(q/p) (N^2 + (1/ln q)(1/q)^N) + 1/ln q`; the bracing intervals in
/// [`crate::optimizer`] and [`crate::verifier`] are built around those forms.
pub fn cost_derivative_in_n(scheme: SchemeId, n: f64, p: Prevalence) -> Result<f64> {
    if n.is_nan() || n < 1.0 {
        return Err(Error::domain(format!(
            "real group size must be at least 1, got {n}"
        )));
    }
    match scheme {
        SchemeId::D0 => Err(Error::UnsupportedScheme {
            scheme,
            operation: "cost_derivative_in_n",
        }),
        SchemeId::D => {
            let qn1 = p.pow_q(n - 1.0);
            Ok(-p.log_q() * (p.pow_q(n) + p.p() * qn1 / n) - (1.0 - p.p() * qn1) / (n * n))
        }
        SchemeId::S => {
            let qn1 = p.pow_q(n + 1.0);
            Ok(qn1 * p.log_q() / (p.p() * n) - 2.0 * p.q() / (n * n)
                + p.one_minus_pow_q(n + 1.0) / (p.p() * n * n))
        }
    }
}
