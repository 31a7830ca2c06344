//! Numerical verification of every inequality behind the optimal-size
//! claims: the auxiliary functions `g_m`, the cut-off `p*`, the Sterrett
//! exclusion gap, the Dorfman region margin and bracing function, and grid
//! reports bundling all of them.
//!
//! # The `g_m` family
//!
//! For `m` in `{-1, 0, 1}` and `p` below the pooling cut-off,
//!
//! ```text
//! g_m(p) = (1/q) * [ (1 - 2pq) / ( q^(1+m) * (1 - ln q * sqrt(2/p) * (1 + m*sqrt(p/2))) ) ]^sqrt(p/2)
//! ```
//!
//! These calibrate where the continuous Sterrett minimizer sits relative to
//! `sqrt(2/p)`: `g_0` crosses 1 exactly once, at `p* ~ 0.17113`, which is
//! where the closed-form candidate window shifts, while `g_1 > 1` and
//! `g_{-1} < 1` hold across the whole interval.
//!
//! Near zero the margins are extraordinarily thin — `ln g_1(1e-9)` is about
//! `3.3e-19`, far below the spacing of doubles around 1 — so the inequality
//! checks run on [`ln_g`], which assembles the logarithm from `ln_1p` terms
//! and keeps those margins exact in double precision. [`g`] itself is the
//! exponential of that value; the two are the same expression, grouped for
//! accuracy. Below `p = 1e-9` nothing is evaluated: there the inequalities
//! are settled by series expansion, not floating point, and the grids stop
//! accordingly.

use std::sync::OnceLock;

use serde::Serialize;

use crate::bisect::bisect;
use crate::error::{Error, Result};
use crate::grid::{linear, log_spaced};
use crate::optimizer::{
    continuous_minimizer, optimal_group_size_bruteforce, optimal_group_size_closed_form_with_p_star,
};
use crate::schemes::{cost_per_item, cost_per_item_real, ungar_cutoff, Prevalence, SchemeId};

/// Index `m` of the auxiliary function `g_m`; only −1, 0, 1 exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GIndex {
    m: i8,
}

impl GIndex {
    pub const MINUS_ONE: GIndex = GIndex { m: -1 };
    pub const ZERO: GIndex = GIndex { m: 0 };
    pub const ONE: GIndex = GIndex { m: 1 };

    pub fn new(m: i32) -> Result<Self> {
        match m {
            -1..=1 => Ok(GIndex { m: m as i8 }),
            other => Err(Error::domain(format!(
                "g index must be one of -1, 0, 1, got {other}"
            ))),
        }
    }

    pub fn m(self) -> i32 {
        self.m as i32
    }
}

fn check_below_cutoff(p: Prevalence, what: &str) -> Result<()> {
    if p.p() >= ungar_cutoff() {
        return Err(Error::domain(format!(
            "{what} needs p below the pooling cut-off {:.6}, got {}",
            ungar_cutoff(),
            p.p()
        )));
    }
    Ok(())
}

/// `ln g_m(p)`, assembled from `ln_1p` pieces so the sign is trustworthy
/// even where `g_m` is within 1e-19 of 1:
///
/// ```text
/// ln g_m = e*( ln_1p(-2pq) - (1+m) ln q - ln_1p(-ln q * s * (1 + m e)) ) - ln q
/// ```
///
/// with `s = sqrt(2/p)` and `e = sqrt(p/2) = 1/s`.
pub fn ln_g(m: GIndex, p: Prevalence) -> Result<f64> {
    check_below_cutoff(p, "g_m")?;
    let mf = f64::from(m.m);
    let s = (2.0 / p.p()).sqrt();
    let e = (p.p() / 2.0).sqrt();
    let log_q = p.log_q();
    let inner = (-2.0 * p.p() * p.q()).ln_1p()
        - (1.0 + mf) * log_q
        - (-log_q * s * (1.0 + mf * e)).ln_1p();
    Ok(e * inner - log_q)
}

/// The auxiliary function `g_m` itself (see module docs); finite and
/// positive on the whole domain.
pub fn g(m: GIndex, p: Prevalence) -> Result<f64> {
    Ok(ln_g(m, p)?.exp())
}

/// The unit crossing of `g_0`: bisection of `g_0 - 1` on `[0.05, 0.3]`,
/// run to float exhaustion, leaving `|g_0(result) - 1|` below 1e-12.
pub fn find_p_star() -> Result<f64> {
    let f = |p: f64| {
        // expm1 of the log form is g_0 - 1 without cancellation.
        ln_g(GIndex::ZERO, Prevalence::new(p).expect("bracket inside (0,1)"))
            .expect("bracket below cut-off")
            .exp_m1()
    };
    Ok(bisect(f, 0.05, 0.3, 0.0, "locating the unit crossing of g_0")?.x)
}

/// Process-wide cached [`find_p_star`]; every caller observes the same
/// value, including under concurrent first use.
pub fn p_star() -> Result<f64> {
    static CACHE: OnceLock<Result<f64>> = OnceLock::new();
    CACHE.get_or_init(find_p_star).clone()
}

/// The Sterrett exclusion gap
/// `f(p) = t_S(floor(sqrt(2/p)) - 1, p) - t_S(floor(sqrt(2/p)), p)`,
/// defined for `p` strictly between `p*` and the pooling cut-off. Its
/// positivity is what removes `floor(sqrt(2/p)) - 1` from the candidate set
/// on that interval; it vanishes at the cut-off and is left-continuous at
/// the breakpoint `2/9` where the floor steps from 3 to 2.
pub fn sterrett_gap(p: Prevalence) -> Result<f64> {
    let ps = p_star()?;
    check_below_cutoff(p, "sterrett_gap")?;
    if p.p() <= ps {
        return Err(Error::domain(format!(
            "sterrett_gap needs p above p* = {ps:.6}, got {}",
            p.p()
        )));
    }
    let k = (2.0 / p.p()).sqrt().floor() as u64; // 2 or 3 on this interval
    Ok(cost_per_item(SchemeId::S, k - 1, p)? - cost_per_item(SchemeId::S, k, p)?)
}

/// Margin certifying the Dorfman sub-level region along the slice `y = sqrt(p)`:
///
/// ```text
/// f(y) = (1/y - 5y^2/2) ln(1 - y^2) + ln(1 + (1 - y^2)(1/y - 5y^2/2))
/// ```
///
/// for `y` in `(0, sqrt((3 - sqrt(5))/2))`. Positivity of this margin puts
/// the upper bracing curve `sqrt(1/p) + 1 - (5/2)p` strictly inside the
/// region where `t_D < 1`; it decreases toward ~0.0244 at the right edge.
pub fn dorfman_region_margin(y: f64) -> Result<f64> {
    let hi = ungar_cutoff().sqrt();
    if !(y > 0.0 && y < hi && y.is_finite()) {
        return Err(Error::domain(format!(
            "region margin is defined for y in (0, {hi:.6}), got {y}"
        )));
    }
    let c = 1.0 / y - 2.5 * y * y;
    Ok(c * (-(y * y)).ln_1p() + (1.0 + (1.0 - y * y) * c).ln())
}

/// The bracing function `h(θ, p) = p^(3/2) (f(N(θ), p) - N(θ))` with
///
/// ```text
/// N(θ)    = 1/sqrt(p) - p + θ (1 - (3/2) p)
/// f(N, p) = -(q/p) (N^2 + (1/ln q)(1/q)^N) + 1/ln q
/// ```
///
/// As `θ` sweeps `[0, 1]`, `N(θ)` sweeps the bracket
/// `[sqrt(1/p) - p, sqrt(1/p) + 1 - (5/2)p]`; `h` is positive at `θ = 0`,
/// negative at `θ = 1`, and strictly decreasing in between, which is what
/// pins the continuous Dorfman minimizer inside that bracket.
pub fn dorfman_brace(theta: f64, p: Prevalence) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::domain(format!(
            "brace parameter must lie in [0, 1], got {theta}"
        )));
    }
    check_below_cutoff(p, "dorfman_brace")?;
    let n = 1.0 / p.p().sqrt() - p.p() + theta * (1.0 - 1.5 * p.p());
    let log_q = p.log_q();
    let inv_q_pow_n = (-n * log_q).exp();
    let f = -(p.q() / p.p()) * (n * n + inv_q_pow_n / log_q) + 1.0 / log_q;
    Ok(p.p().powf(1.5) * (f - n))
}

/// Whether `(n, p)` lies in the region where grouping beats individual
/// testing for scheme D: `p` below the pooling cut-off and the real-`N`
/// extension of `t_D` strictly below 1.
pub fn in_region_a_d(n: f64, p: Prevalence) -> Result<bool> {
    if n.is_nan() || n < 1.0 {
        return Err(Error::domain(format!(
            "real group size must be at least 1, got {n}"
        )));
    }
    Ok(p.p() < ungar_cutoff() && cost_per_item_real(SchemeId::D, n, p)? < 1.0)
}

/// Outcome of one grid-checked claim.
///
/// `worst_margin` is the signed distance to violation — positive means the
/// claim held with room to spare, and `passed` is exactly `worst_margin > 0`.
/// For inequality claims the margin is the smallest slack seen on the grid;
/// for the argmin-agreement claims it is the narrowest winning gap between
/// the chosen group size and its runner-up (or `-(mismatches)` on failure);
/// for the sign-pattern claim it is `1 - |changes - 1|`. `worst_location`
/// is the grid coordinate (`p`, `y`, or `θ`) where the margin was tightest.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub grid: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub worst_location: f64,
}

impl VerificationReport {
    fn new(claim_id: &str, grid: String, worst_margin: f64, worst_location: f64) -> Self {
        VerificationReport {
            claim_id: claim_id.to_string(),
            grid,
            passed: worst_margin > 0.0,
            worst_margin,
            worst_location,
        }
    }
}

/// Running minimum with its location.
struct Worst {
    margin: f64,
    location: f64,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            location: f64::NAN,
        }
    }

    fn observe(&mut self, margin: f64, location: f64) {
        if margin < self.margin {
            self.margin = margin;
            self.location = location;
        }
    }
}

fn describe(kind: &str, lo: f64, hi: f64, count: usize) -> String {
    format!("{kind}, {count} points on [{lo:e}, {hi:e}]")
}

/// Runs every grid-checked claim and returns one report per claim — always
/// the same 11, in a fixed order. Verification failures are reported, not
/// returned as errors; only an undersized grid (< 10 points) is rejected.
///
/// The claims, by `claim_id`:
///
/// 1. `g1_above_one` — `ln g_1 > 0` on a log grid over `[1e-9, cut-off - 1e-9]`.
/// 2. `g_minus1_below_one` — `ln g_{-1} < 0` on the same grid.
/// 3. `p_star_unique` — `g_0 - 1` changes sign exactly once on that grid.
/// 4. `sterrett_gap_positive` — the exclusion gap is positive on a linear
///    grid over `[p* + 1e-6, cut-off - 1e-9]`.
/// 5. `dorfman_region_margin_positive` — the slice margin is positive on a
///    linear `y`-grid over `[1e-9, sqrt(cut-off) - 1e-9]`.
/// 6. `dorfman_brace_behaviour` — `h(0, p) h(1, p) < 0` and the central
///    difference of `h` in `θ` is negative at `θ ∈ {1/4, 1/2, 3/4}`.
/// 7. `closed_form_matches_bruteforce_D0`, then `_D` and `_S` as claims 8
///    and 9 — the candidate-set argmin equals the scan argmin on a log
///    grid over `[1e-6, cut-off - 1e-9]`.
/// 10. `ungar_individual_testing` — for `p` in `[cut-off + 1e-9, 0.99]`,
///     the scan argmin is 1 for D and S and `t > 1` for every `n` in
///     `[2, 200]`.
/// 11. `sterrett_minimizer_decreasing` — the continuous minimizer strictly
///     decreases along the increasing grid of claim 7.
pub fn verify_all(grid_points: usize) -> Result<Vec<VerificationReport>> {
    if grid_points < 10 {
        return Err(Error::domain(format!(
            "verification grid needs at least 10 points, got {grid_points}"
        )));
    }
    let cutoff = ungar_cutoff();
    let full_lo = 1e-9;
    let full_hi = cutoff - 1e-9;
    let full_grid = log_spaced(full_lo, full_hi, grid_points)?;
    let full_desc = describe("log-spaced", full_lo, full_hi, grid_points);

    let mut reports = Vec::with_capacity(11);

    // 1–2: the strict g inequalities, in log form.
    for (claim, m, flip) in [
        ("g1_above_one", GIndex::ONE, 1.0),
        ("g_minus1_below_one", GIndex::MINUS_ONE, -1.0),
    ] {
        let mut worst = Worst::new();
        for &pv in &full_grid {
            let margin = flip * ln_g(m, Prevalence::new(pv)?)?;
            worst.observe(margin, pv);
        }
        reports.push(VerificationReport::new(
            claim,
            full_desc.clone(),
            worst.margin,
            worst.location,
        ));
    }

    // 3: g_0 - 1 crosses zero exactly once.
    {
        let values: Vec<f64> = full_grid
            .iter()
            .map(|&pv| ln_g(GIndex::ZERO, Prevalence::new(pv)?))
            .collect::<Result<_>>()?;
        let mut changes = 0usize;
        let mut crossing = f64::NAN;
        for (w, pw) in values.windows(2).zip(full_grid.windows(2)) {
            if w[0] * w[1] < 0.0 {
                changes += 1;
                // On failure this points at the extra (or only) crossing.
                crossing = pw[0] + (pw[1] - pw[0]) / 2.0;
            }
        }
        let margin = 1.0 - (changes as f64 - 1.0).abs();
        reports.push(VerificationReport::new(
            "p_star_unique",
            full_desc.clone(),
            margin,
            crossing,
        ));
    }

    // 4: the Sterrett exclusion gap stays positive up to the cut-off.
    {
        let report = match p_star() {
            Ok(ps) => {
                let lo = ps + 1e-6;
                let grid = linear(lo, full_hi, grid_points)?;
                let mut worst = Worst::new();
                for &pv in &grid {
                    worst.observe(sterrett_gap(Prevalence::new(pv)?)?, pv);
                }
                VerificationReport::new(
                    "sterrett_gap_positive",
                    describe("linear", lo, full_hi, grid_points),
                    worst.margin,
                    worst.location,
                )
            }
            Err(_) => VerificationReport::new(
                "sterrett_gap_positive",
                "p* unavailable".to_string(),
                f64::NEG_INFINITY,
                f64::NAN,
            ),
        };
        reports.push(report);
    }

    // 5: the slice margin for the Dorfman region.
    {
        let hi = cutoff.sqrt() - 1e-9;
        let grid = linear(1e-9, hi, grid_points)?;
        let mut worst = Worst::new();
        for &y in &grid {
            worst.observe(dorfman_region_margin(y)?, y);
        }
        reports.push(VerificationReport::new(
            "dorfman_region_margin_positive",
            describe("linear", 1e-9, hi, grid_points),
            worst.margin,
            worst.location,
        ));
    }

    // 6: the brace changes sign across [0, 1] and is decreasing inside.
    {
        let mut worst = Worst::new();
        let delta = 1e-3;
        for &pv in &full_grid {
            let p = Prevalence::new(pv)?;
            let h0 = dorfman_brace(0.0, p)?;
            let h1 = dorfman_brace(1.0, p)?;
            worst.observe(-h0 * h1, pv);
            for theta in [0.25, 0.5, 0.75] {
                let slope = (dorfman_brace(theta + delta, p)?
                    - dorfman_brace(theta - delta, p)?)
                    / (2.0 * delta);
                worst.observe(-slope, pv);
            }
        }
        reports.push(VerificationReport::new(
            "dorfman_brace_behaviour",
            full_desc.clone(),
            worst.margin,
            worst.location,
        ));
    }

    // 7–9: closed form against the scan, one report per scheme.
    let prop_lo = 1e-6;
    let prop_grid = log_spaced(prop_lo, full_hi, grid_points)?;
    let prop_desc = describe("log-spaced", prop_lo, full_hi, grid_points);
    for scheme in [SchemeId::D0, SchemeId::D, SchemeId::S] {
        let claim = match scheme {
            SchemeId::D0 => "closed_form_matches_bruteforce_D0",
            SchemeId::D => "closed_form_matches_bruteforce_D",
            SchemeId::S => "closed_form_matches_bruteforce_S",
        };
        let report = match p_star() {
            Ok(ps) => {
                let mut worst = Worst::new();
                let mut mismatches = 0usize;
                let mut first_bad = f64::NAN;
                for &pv in &prop_grid {
                    let p = Prevalence::new(pv)?;
                    let bf = optimal_group_size_bruteforce(scheme, p, None)?;
                    let cf = optimal_group_size_closed_form_with_p_star(scheme, p, ps)?;
                    if bf.n_opt != cf.n_opt {
                        mismatches += 1;
                        if mismatches == 1 {
                            first_bad = pv;
                        }
                        continue;
                    }
                    // Winning gap: how decisively the argmin beat the rest
                    // of the scanned range.
                    let mut gap = f64::INFINITY;
                    for &c in &bf.candidates {
                        if c != bf.n_opt {
                            let t = cost_per_item(scheme, c, p)?;
                            gap = gap.min(t - bf.t_opt);
                        }
                    }
                    worst.observe(gap, pv);
                }
                if mismatches > 0 {
                    VerificationReport::new(
                        claim,
                        prop_desc.clone(),
                        -(mismatches as f64),
                        first_bad,
                    )
                } else {
                    VerificationReport::new(claim, prop_desc.clone(), worst.margin, worst.location)
                }
            }
            Err(_) => VerificationReport::new(
                claim,
                "p* unavailable".to_string(),
                f64::NEG_INFINITY,
                f64::NAN,
            ),
        };
        reports.push(report);
    }

    // 10: above the cut-off nothing beats individual testing.
    {
        let lo = cutoff + 1e-9;
        let grid = linear(lo, 0.99, grid_points)?;
        let mut worst = Worst::new();
        for &pv in &grid {
            let p = Prevalence::new(pv)?;
            for scheme in [SchemeId::D, SchemeId::S] {
                let bf = optimal_group_size_bruteforce(scheme, p, None)?;
                if bf.n_opt != 1 {
                    worst.observe(-1.0, pv);
                }
                for n in 2..=200u64 {
                    worst.observe(cost_per_item(scheme, n, p)? - 1.0, pv);
                }
            }
        }
        reports.push(VerificationReport::new(
            "ungar_individual_testing",
            describe("linear", lo, 0.99, grid_points),
            worst.margin,
            worst.location,
        ));
    }

    // 11: the continuous Sterrett minimizer is strictly decreasing.
    {
        let mut worst = Worst::new();
        let mut previous: Option<f64> = None;
        for &pv in &prop_grid {
            let x = continuous_minimizer(SchemeId::S, Prevalence::new(pv)?)?.x;
            if let Some(prev) = previous {
                worst.observe(prev - x, pv);
            }
            previous = Some(x);
        }
        reports.push(VerificationReport::new(
            "sterrett_minimizer_decreasing",
            prop_desc,
            worst.margin,
            worst.location,
        ));
    }

    Ok(reports)
}
