//! Procedural execution of the schemes on concrete infection patterns.
//!
//! Everything in this module is independent of the closed forms in
//! [`crate::schemes`]: [`run_scheme`] walks the testing protocol step by
//! step on a known status vector, [`exact_expected_tests`] averages it over
//! all `2^n` patterns, and [`simulate_expected_tests`] averages it over
//! random patterns. Agreement between these and the formulas is what pins
//! the procedural conventions down — in particular the inference rule that
//! a positive (sub)pool whose first `m − 1` members all test negative has
//! its last member declared bad without a test. That rule applies to the
//! final item in scheme D and, in scheme S, to the last member of every
//! re-pooled tail; it is the convention under which enumeration reproduces
//! the Sterrett closed form.
//!
//! # Reproducibility
//!
//! The Monte Carlo source is ChaCha8 (`rand_chacha::ChaCha8Rng`). The
//! master state is `ChaCha8Rng::seed_from_u64(seed)`; replication `i` uses
//! a clone of the master with its stream id set to `i`, so every
//! replication has its own substream no matter how work is divided among
//! threads. Within a replication, item `j` consumes one 64-bit draw; the
//! top 53 bits map to a uniform in `[0, 1)` and the item is defective iff
//! that uniform is `< p`. Test counts are integers, and they are aggregated
//! in exact integer arithmetic, so results are bit-identical for identical
//! `(scheme, n, p, replications, seed)` under any thread count.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::schemes::{Prevalence, SchemeId};

/// Known good/bad pattern for a batch; `true` means defective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusVector(Vec<bool>);

impl StatusVector {
    /// Validates that the batch is non-empty.
    pub fn new(statuses: Vec<bool>) -> Result<Self> {
        if statuses.is_empty() {
            return Err(Error::domain("status vector must be non-empty"));
        }
        Ok(StatusVector(statuses))
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }
}

/// Number of tests the scheme spends on one concrete batch.
pub fn run_scheme(scheme: SchemeId, statuses: &StatusVector) -> u32 {
    tests_used(scheme, statuses.as_slice())
}

/// Core protocol walk; `s` is non-empty.
fn tests_used(scheme: SchemeId, s: &[bool]) -> u32 {
    let n = s.len();
    if n == 1 {
        return 1;
    }
    match scheme {
        SchemeId::D0 => {
            // Pool test, then every member individually on a positive.
            if s.iter().any(|&b| b) {
                1 + n as u32
            } else {
                1
            }
        }
        SchemeId::D => {
            if !s.iter().any(|&b| b) {
                1
            } else if s[..n - 1].iter().any(|&b| b) {
                1 + n as u32
            } else {
                // Only the last member is bad: the first n - 1 individual
                // tests come back negative and the last is inferred.
                n as u32
            }
        }
        SchemeId::S => {
            let mut tests = 0u32;
            let mut rest = s;
            loop {
                let m = rest.len();
                if m == 1 {
                    tests += 1;
                    break;
                }
                tests += 1; // pool test on the remaining group
                if !rest.iter().any(|&b| b) {
                    break;
                }
                // Pool is positive: test members in order until the first
                // bad one, then re-pool everything after it. If the first
                // m - 1 all test negative the last member is inferred bad.
                let mut first_bad = None;
                for (i, &bad) in rest[..m - 1].iter().enumerate() {
                    tests += 1;
                    if bad {
                        first_bad = Some(i);
                        break;
                    }
                }
                match first_bad {
                    None => break,
                    Some(i) => rest = &rest[i + 1..],
                }
            }
            tests
        }
    }
}

/// Expected total tests `E T` by exhaustive enumeration of all `2^n`
/// status patterns, each weighted by `p^bad * q^good`.
///
/// Caps at `n <= 24` (about 16.7M patterns). Weights switch to log-space
/// evaluation below `p = 1e-4` so tiny prevalences keep full precision;
/// the pattern sum is compensated (Kahan) to hold the 1e-12 agreement with
/// `n * cost_per_item` that the formulas are tested against.
pub fn exact_expected_tests(scheme: SchemeId, n: u32, p: Prevalence) -> Result<f64> {
    if n < 1 {
        return Err(Error::domain("group size must be at least 1"));
    }
    if n > 24 {
        return Err(Error::ResourceLimit(format!(
            "exhaustive enumeration is capped at n = 24 (2^24 patterns); got n = {n}"
        )));
    }
    let ln_p = p.p().ln();
    let log_space = p.p() < 1e-4;
    let mut buf = vec![false; n as usize];
    let mut sum = KahanSum::default();
    for pattern in 0u32..(1u32 << n) {
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = (pattern >> i) & 1 == 1;
        }
        let bad = pattern.count_ones();
        let weight = if log_space {
            (bad as f64 * ln_p + (n - bad) as f64 * p.log_q()).exp()
        } else {
            p.p().powi(bad as i32) * p.q().powi((n - bad) as i32)
        };
        sum.add(weight * tests_used(scheme, &buf) as f64);
    }
    Ok(sum.value())
}

/// Monte Carlo estimate of the per-item cost `t`, with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationEstimate {
    pub scheme: SchemeId,
    pub n: u64,
    pub p: f64,
    /// Estimated tests per item (sample mean of `T / n`).
    pub mean: f64,
    /// Sample standard deviation of `T / n` divided by sqrt(replications);
    /// zero when there is a single replication.
    pub std_error: f64,
    pub replications: u64,
    pub seed: u64,
}

/// Seeded Monte Carlo estimate of `t`, parallelized across all available
/// cores. See the module docs for the exact generator derivation; output
/// is bit-identical to [`simulate_expected_tests_with_threads`] at any
/// thread count.
pub fn simulate_expected_tests(
    scheme: SchemeId,
    n: u64,
    p: Prevalence,
    replications: u64,
    seed: u64,
) -> Result<SimulationEstimate> {
    let threads = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    simulate_expected_tests_with_threads(scheme, n, p, replications, seed, threads)
}

/// [`simulate_expected_tests`] with an explicit worker count.
pub fn simulate_expected_tests_with_threads(
    scheme: SchemeId,
    n: u64,
    p: Prevalence,
    replications: u64,
    seed: u64,
    threads: usize,
) -> Result<SimulationEstimate> {
    if n < 1 {
        return Err(Error::domain("group size must be at least 1"));
    }
    if replications < 1 {
        return Err(Error::domain("replication count must be at least 1"));
    }
    if threads < 1 {
        return Err(Error::domain("thread count must be at least 1"));
    }
    let n_usize = usize::try_from(n)
        .map_err(|_| Error::ResourceLimit(format!("group size {n} exceeds address space")))?;

    let master = ChaCha8Rng::seed_from_u64(seed);
    let workers = threads.min(replications as usize).max(1);
    let chunk = replications / workers as u64;
    let remainder = replications % workers as u64;

    // Per-replication test counts are integers and depend only on
    // (seed, replication index), so summing them in integer arithmetic is
    // exact and order-free: any partition into chunks gives the same sums.
    let mut total: u128 = 0;
    let mut total_sq: u128 = 0;
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        let mut start = 0u64;
        for w in 0..workers as u64 {
            let len = chunk + u64::from(w < remainder);
            let range = start..start + len;
            start += len;
            let master = &master;
            handles.push(scope.spawn(move || {
                let mut statuses = vec![false; n_usize];
                let mut sum: u128 = 0;
                let mut sum_sq: u128 = 0;
                for rep in range {
                    let mut rng = master.clone();
                    rng.set_stream(rep);
                    for slot in statuses.iter_mut() {
                        let u = (rng.next_u64() >> 11) as f64 * 2.0_f64.powi(-53);
                        *slot = u < p.p();
                    }
                    let t = tests_used(scheme, &statuses) as u128;
                    sum += t;
                    sum_sq += t * t;
                }
                (sum, sum_sq)
            }));
        }
        for handle in handles {
            let (sum, sum_sq) = handle.join().expect("simulation worker panicked");
            total += sum;
            total_sq += sum_sq;
        }
    });

    let reps = replications as f64;
    let mean = total as f64 / (reps * n as f64);
    let std_error = if replications == 1 {
        0.0
    } else {
        // Sample variance of T from exact integer sums:
        //   s^2 = (reps * sum T^2 - (sum T)^2) / (reps * (reps - 1))
        let numerator = replications as u128 * total_sq - total * total;
        let var_t = numerator as f64 / (reps * (reps - 1.0));
        var_t.sqrt() / (n as f64 * reps.sqrt())
    };
    Ok(SimulationEstimate {
        scheme,
        n,
        p: p.p(),
        mean,
        std_error,
        replications,
        seed,
    })
}

/// Compensated accumulator; keeps the 2^n-term enumeration sums tight.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::cost_per_item;

    fn prev(p: f64) -> Prevalence {
        Prevalence::new(p).unwrap()
    }

    fn sv(bits: &[bool]) -> StatusVector {
        StatusVector::new(bits.to_vec()).unwrap()
    }

    const B: bool = true; // bad
    const G: bool = false; // good

    #[test]
    fn empty_vector_is_rejected() {
        assert!(StatusVector::new(vec![]).is_err());
        let v = sv(&[G]);
        assert_eq!(v.len(), 1);
        assert!(!v.is_empty());
    }

    #[test]
    fn hand_traces() {
        assert_eq!(run_scheme(SchemeId::D0, &sv(&[G, G, G])), 1);
        assert_eq!(run_scheme(SchemeId::D, &sv(&[G, B])), 2);
        assert_eq!(run_scheme(SchemeId::S, &sv(&[B, G, G])), 3);
        assert_eq!(run_scheme(SchemeId::D, &sv(&[B, B])), 3);
    }

    #[test]
    fn all_good_costs_one_pool_test() {
        for scheme in SchemeId::ALL {
            for n in 1..=12 {
                assert_eq!(run_scheme(scheme, &sv(&vec![G; n])), 1);
            }
        }
    }

    #[test]
    fn single_item_is_one_test() {
        for scheme in SchemeId::ALL {
            assert_eq!(run_scheme(scheme, &sv(&[B])), 1);
        }
    }

    #[test]
    fn modified_dorfman_support() {
        for n in 2..=8usize {
            for pattern in 0u32..(1 << n) {
                let bits: Vec<bool> = (0..n).map(|i| (pattern >> i) & 1 == 1).collect();
                let t = run_scheme(SchemeId::D, &sv(&bits));
                assert!(
                    t == 1 || t == n as u32 || t == n as u32 + 1,
                    "n={n} pattern={pattern:b} t={t}"
                );
            }
        }
    }

    #[test]
    fn enumeration_matches_closed_forms() {
        for scheme in SchemeId::ALL {
            for n in 1..=12u32 {
                for pv in [0.01, 0.05, 0.1, 0.2, 0.3] {
                    let p = prev(pv);
                    let exact = exact_expected_tests(scheme, n, p).unwrap();
                    let formula = n as f64 * cost_per_item(scheme, n as u64, p).unwrap();
                    assert!(
                        (exact - formula).abs() < 1e-12,
                        "{scheme} n={n} p={pv}: {exact} vs {formula}"
                    );
                }
            }
        }
    }

    #[test]
    fn enumeration_spot_values() {
        // (D, 2, 0.1): 0.81*1 + 0.09*2 + 0.09*3 + 0.01*3 = 1.29
        let e = exact_expected_tests(SchemeId::D, 2, prev(0.1)).unwrap();
        assert!((e - 1.29).abs() < 1e-12);
        // Sterrett at (3, 0.2) against three times the per-item formula.
        let e = exact_expected_tests(SchemeId::S, 3, prev(0.2)).unwrap();
        assert!((e - 2.248).abs() < 1e-12);
        for scheme in SchemeId::ALL {
            assert_eq!(exact_expected_tests(scheme, 1, prev(0.37)).unwrap(), 1.0);
        }
    }

    #[test]
    fn enumeration_cap() {
        match exact_expected_tests(SchemeId::D, 25, prev(0.1)) {
            Err(Error::ResourceLimit(_)) => {}
            other => panic!("expected ResourceLimit, got {other:?}"),
        }
    }

    #[test]
    fn enumeration_reproduces_distribution_atoms() {
        use crate::schemes::tests_distribution_modified_dorfman;
        for n in 2..=10u32 {
            for pv in [0.01, 0.1, 0.3] {
                let p = prev(pv);
                let mut mass = std::collections::BTreeMap::new();
                for pattern in 0u32..(1 << n) {
                    let bits: Vec<bool> = (0..n).map(|i| (pattern >> i) & 1 == 1).collect();
                    let bad = pattern.count_ones();
                    let w = pv.powi(bad as i32) * (1.0 - pv).powi((n - bad) as i32);
                    let t = run_scheme(SchemeId::D, &sv(&bits));
                    *mass.entry(t as u64).or_insert(0.0) += w;
                }
                let law = tests_distribution_modified_dorfman(n as u64, p).unwrap();
                assert_eq!(mass.len(), law.len());
                for (value, prob) in law {
                    let got = mass.get(&value).copied().unwrap_or(0.0);
                    assert!((got - prob).abs() < 1e-14, "n={n} p={pv} T={value}");
                }
            }
        }
    }

    #[test]
    fn simulation_is_deterministic_across_thread_counts() {
        let p = prev(0.05);
        let base =
            simulate_expected_tests_with_threads(SchemeId::S, 7, p, 5000, 99, 1).unwrap();
        for threads in [2, 3, 8] {
            let other =
                simulate_expected_tests_with_threads(SchemeId::S, 7, p, 5000, 99, threads)
                    .unwrap();
            assert_eq!(base, other, "threads={threads}");
        }
        let again = simulate_expected_tests_with_threads(SchemeId::S, 7, p, 5000, 99, 1).unwrap();
        assert_eq!(base, again);
    }

    #[test]
    fn simulation_agrees_with_formula() {
        let p = prev(0.05);
        let est = simulate_expected_tests(SchemeId::D, 10, p, 200_000, 42).unwrap();
        let t = cost_per_item(SchemeId::D, 10, p).unwrap();
        assert!(est.std_error > 0.0);
        assert!(
            (est.mean - t).abs() < 4.0 * est.std_error,
            "mean={} t={} se={}",
            est.mean,
            t,
            est.std_error
        );
    }

    #[test]
    fn standard_error_scales_like_inverse_sqrt() {
        let p = prev(0.1);
        let small = simulate_expected_tests(SchemeId::D, 8, p, 20_000, 7).unwrap();
        let large = simulate_expected_tests(SchemeId::D, 8, p, 80_000, 7).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!(
            ratio > 2.0 / 1.5 && ratio < 2.0 * 1.5,
            "ratio={ratio} (expected near 2)"
        );
    }

    #[test]
    fn simulation_argument_checks() {
        let p = prev(0.1);
        assert!(simulate_expected_tests(SchemeId::D, 0, p, 10, 1).is_err());
        assert!(simulate_expected_tests(SchemeId::D, 5, p, 0, 1).is_err());
        assert!(simulate_expected_tests_with_threads(SchemeId::D, 5, p, 10, 1, 0).is_err());
        let one = simulate_expected_tests(SchemeId::D, 5, p, 1, 1).unwrap();
        assert_eq!(one.std_error, 0.0);
    }
}
