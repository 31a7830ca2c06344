//! The acceptance gate: one test per release criterion, each printing a
//! single PASS/FAIL line. Tolerances are part of the contract and are not
//! to be loosened without revisiting the claims they certify.

use pooltest::executor::{exact_expected_tests, simulate_expected_tests_with_threads};
use pooltest::grid::{linear, log_spaced};
use pooltest::optimizer::{
    continuous_minimizer, optimal_cost_ratio, optimal_group_size_bruteforce,
};
use pooltest::schemes::cost_per_item;
use pooltest::verifier::{
    dorfman_region_margin, find_p_star, g, ln_g, p_star, sterrett_gap, verify_all, GIndex,
};
use pooltest::{samuels_cutoff, ungar_cutoff, Prevalence, SchemeId};

fn prev(p: f64) -> Prevalence {
    Prevalence::new(p).unwrap()
}

/// The standard verification grid: 500 log-spaced prevalences on
/// [1e-6, cut-off - 1e-9].
fn standard_grid() -> Vec<f64> {
    log_spaced(1e-6, ungar_cutoff() - 1e-9, 500).unwrap()
}

/// Prints the criterion's verdict line, then panics on failure so the
/// test target reports it.
fn conclude(number: u32, slug: &str, failures: Vec<String>) {
    if failures.is_empty() {
        println!("acceptance criterion {number} ({slug}): PASS");
    } else {
        println!("acceptance criterion {number} ({slug}): FAIL");
        panic!(
            "criterion {number} ({slug}) failed {} check(s):\n{}",
            failures.len(),
            failures.join("\n")
        );
    }
}

#[test]
fn criterion_01_oracle_equivalence() {
    let mut failures = Vec::new();
    for scheme in SchemeId::ALL {
        for n in 1..=12u32 {
            for pv in [0.01, 0.05, 0.1, 0.2, 0.3] {
                let p = prev(pv);
                let exact = exact_expected_tests(scheme, n, p).unwrap();
                let formula = n as f64 * cost_per_item(scheme, n as u64, p).unwrap();
                if (exact - formula).abs() >= 1e-12 {
                    failures.push(format!(
                        "{scheme} n={n} p={pv}: enumeration {exact} vs formula {formula}"
                    ));
                }
            }
        }
    }
    conclude(1, "oracle-equivalence", failures);
}

#[test]
fn criterion_02_p_star_recovery() {
    let mut failures = Vec::new();
    let ps = find_p_star().unwrap();
    if (ps - 0.1711).abs() >= 5e-4 {
        failures.push(format!("find_p_star() = {ps}, expected 0.1711 +- 5e-4"));
    }
    conclude(2, "p-star-recovery", failures);
}

#[test]
fn criterion_03_gap_values() {
    let mut failures = Vec::new();
    let at_breakpoint = sterrett_gap(prev(2.0 / 9.0)).unwrap();
    if (at_breakpoint - 0.018976).abs() >= 1e-5 {
        failures.push(format!(
            "sterrett_gap(2/9) = {at_breakpoint}, expected 0.018976 +- 1e-5"
        ));
    }
    let at_cutoff = sterrett_gap(prev(ungar_cutoff() - 1e-9)).unwrap();
    if at_cutoff.abs() >= 1e-6 {
        failures.push(format!(
            "sterrett_gap(cut-off - 1e-9) = {at_cutoff}, expected 0 +- 1e-6"
        ));
    }
    conclude(3, "gap-values", failures);
}

#[test]
fn criterion_04_limit_values() {
    let mut failures = Vec::new();
    let g_minus1 = g(GIndex::MINUS_ONE, prev(ungar_cutoff() - 1e-9)).unwrap();
    if (g_minus1 - 0.9912).abs() >= 1e-3 {
        failures.push(format!(
            "g(-1, cut-off - 1e-9) = {g_minus1}, expected 0.9912 +- 1e-3"
        ));
    }
    let margin = dorfman_region_margin(ungar_cutoff().sqrt() - 1e-9).unwrap();
    if (margin - 0.024).abs() >= 1e-3 {
        failures.push(format!(
            "region margin at sqrt(cut-off) - 1e-9 = {margin}, expected 0.024 +- 1e-3"
        ));
    }
    conclude(4, "limit-values", failures);
}

#[test]
fn criterion_05_dorfman_candidate_window() {
    let mut failures = Vec::new();
    for pv in standard_grid() {
        let p = prev(pv);
        let n_opt = optimal_group_size_bruteforce(SchemeId::D, p, None)
            .unwrap()
            .n_opt;
        let base = (1.0 / pv).sqrt().floor() as u64;
        if n_opt != base && n_opt != base + 1 {
            failures.push(format!(
                "p={pv}: brute-force D optimum {n_opt} outside {{{base}, {}}}",
                base + 1
            ));
        }
    }
    conclude(5, "dorfman-candidates", failures);
}

#[test]
fn criterion_06_sterrett_candidate_window() {
    let mut failures = Vec::new();
    let ps = p_star().unwrap();
    for pv in standard_grid() {
        let p = prev(pv);
        let n_opt = optimal_group_size_bruteforce(SchemeId::S, p, None)
            .unwrap()
            .n_opt;
        let base = (2.0 / pv).sqrt().floor() as u64;
        let ok = if pv > ps {
            n_opt == base || n_opt == base + 1
        } else {
            n_opt == base || n_opt == base + 1 || n_opt == base + 2
        };
        if !ok {
            failures.push(format!(
                "p={pv}: brute-force S optimum {n_opt} outside the window at base {base}"
            ));
        }
    }
    conclude(6, "sterrett-candidates", failures);
}

#[test]
fn criterion_07_samuels_candidates() {
    let mut failures = Vec::new();
    for pv in standard_grid() {
        if pv >= samuels_cutoff() {
            continue;
        }
        let n_opt = optimal_group_size_bruteforce(SchemeId::D0, prev(pv), None)
            .unwrap()
            .n_opt;
        let base = (1.0 / pv).sqrt().floor() as u64;
        if n_opt != base + 1 && n_opt != base + 2 {
            failures.push(format!(
                "p={pv}: brute-force D0 optimum {n_opt} outside {{{}, {}}}",
                base + 1,
                base + 2
            ));
        }
    }
    for pv in linear(samuels_cutoff() + 1e-9, 0.99, 20).unwrap() {
        let n_opt = optimal_group_size_bruteforce(SchemeId::D0, prev(pv), None)
            .unwrap()
            .n_opt;
        if n_opt != 1 {
            failures.push(format!("p={pv}: D0 optimum {n_opt}, expected 1"));
        }
    }
    conclude(7, "samuels", failures);
}

#[test]
fn criterion_08_ungar_cutoff() {
    let mut failures = Vec::new();
    for pv in linear(ungar_cutoff() + 1e-9, 0.99, 20).unwrap() {
        let p = prev(pv);
        for scheme in [SchemeId::D, SchemeId::S] {
            let n_opt = optimal_group_size_bruteforce(scheme, p, None).unwrap().n_opt;
            if n_opt != 1 {
                failures.push(format!("p={pv}: {scheme} optimum {n_opt}, expected 1"));
            }
            for n in 2..=200u64 {
                let t = cost_per_item(scheme, n, p).unwrap();
                if t < 1.0 {
                    failures.push(format!("p={pv} {scheme} n={n}: t = {t} < 1"));
                }
            }
        }
    }
    conclude(8, "ungar", failures);
}

#[test]
fn criterion_09_asymptotic_cost_ratio() {
    let mut failures = Vec::new();
    let ratio = optimal_cost_ratio(prev(1e-5)).unwrap();
    let root2 = 2.0_f64.sqrt();
    if (ratio - root2).abs() >= 0.05 * root2 {
        failures.push(format!(
            "optimal_cost_ratio(1e-5) = {ratio}, expected sqrt(2) +- 5%"
        ));
    }
    conclude(9, "asymptotic-ratio", failures);
}

#[test]
fn criterion_10_bracing_intervals() {
    let mut failures = Vec::new();
    for pv in standard_grid() {
        let p = prev(pv);
        let x_d = continuous_minimizer(SchemeId::D, p).unwrap().x;
        let sqrt_inv = (1.0 / pv).sqrt();
        let (lo, hi) = (sqrt_inv - pv, sqrt_inv + 1.0 - 2.5 * pv);
        if !(x_d > lo && x_d < hi) {
            failures.push(format!("p={pv}: D minimizer {x_d} outside ({lo}, {hi})"));
        }
        if pv < 0.3 && x_d <= sqrt_inv {
            failures.push(format!("p={pv}: D minimizer {x_d} <= sqrt(1/p) = {sqrt_inv}"));
        }
        let x_s = continuous_minimizer(SchemeId::S, p).unwrap().x;
        let sqrt_2inv = (2.0 / pv).sqrt();
        if !(x_s >= sqrt_2inv - 1.0 && x_s <= sqrt_2inv + 1.0) {
            failures.push(format!(
                "p={pv}: S minimizer {x_s} outside [{}, {}]",
                sqrt_2inv - 1.0,
                sqrt_2inv + 1.0
            ));
        }
    }
    conclude(10, "bracing", failures);
}

#[test]
fn criterion_11_monte_carlo() {
    let mut failures = Vec::new();
    let triples: [(SchemeId, u64, f64); 10] = [
        (SchemeId::D0, 5, 0.05),
        (SchemeId::D0, 10, 0.1),
        (SchemeId::D0, 3, 0.25),
        (SchemeId::D, 10, 0.05),
        (SchemeId::D, 5, 0.02),
        (SchemeId::D, 2, 0.3),
        (SchemeId::S, 15, 0.01),
        (SchemeId::S, 7, 0.05),
        (SchemeId::S, 3, 0.2),
        (SchemeId::S, 31, 0.002),
    ];
    let seed = 0x706f6f6c;
    for (scheme, n, pv) in triples {
        let p = prev(pv);
        let est = simulate_expected_tests_with_threads(scheme, n, p, 200_000, seed, 1).unwrap();
        let t = cost_per_item(scheme, n, p).unwrap();
        if (est.mean - t).abs() >= 4.0 * est.std_error {
            failures.push(format!(
                "{scheme} n={n} p={pv}: mean {} vs t {} exceeds 4 se = {}",
                est.mean,
                t,
                4.0 * est.std_error
            ));
        }
        for threads in [2, 8] {
            let other =
                simulate_expected_tests_with_threads(scheme, n, p, 200_000, seed, threads)
                    .unwrap();
            if format!("{other:?}") != format!("{est:?}") {
                failures.push(format!(
                    "{scheme} n={n} p={pv}: output differs between 1 and {threads} threads"
                ));
            }
        }
    }
    conclude(11, "monte-carlo", failures);
}

#[test]
fn criterion_12_verify_all() {
    let mut failures = Vec::new();
    let reports = verify_all(500).unwrap();
    if reports.len() != 11 {
        failures.push(format!("expected 11 reports, got {}", reports.len()));
    }
    for report in &reports {
        if !report.passed {
            failures.push(format!(
                "claim {} failed with margin {} at {}",
                report.claim_id, report.worst_margin, report.worst_location
            ));
        }
    }
    // Independent recount of the g_0 - 1 sign pattern on the same grid.
    let grid = log_spaced(1e-9, ungar_cutoff() - 1e-9, 500).unwrap();
    let values: Vec<f64> = grid
        .iter()
        .map(|&pv| ln_g(GIndex::ZERO, prev(pv)).unwrap())
        .collect();
    let changes = values.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    if changes != 1 {
        failures.push(format!("g_0 - 1 changes sign {changes} times, expected exactly 1"));
    }
    conclude(12, "verify-all", failures);
}
