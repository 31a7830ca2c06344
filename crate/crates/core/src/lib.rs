//! Expected-cost analysis and optimal pool sizes for probabilistic group testing.
//!
//! Items drawn from a binomial population are defective independently with
//! prevalence `p`. Instead of testing one by one, a batch of `N` samples is
//! pooled and the pool is tested; positives trigger follow-up tests. Three
//! classic schemes are covered:
//!
//! * **D0** (Dorfman) — one pool test; if positive, every member is tested
//!   individually.
//! * **D** (modified Dorfman) — as D0, except the last member is skipped
//!   when the first `N - 1` individual tests all come back negative, since
//!   its status is then forced by the positive pool.
//! * **S** (Sterrett) — on a positive pool, test members one at a time until
//!   the first positive, then re-pool the remaining tail and repeat.
//!
//! The figure of merit is the expected number of tests per item,
//! `t(N, p) = E[T] / N`, and the central question is which integer `N`
//! minimizes it for a given `p`.
//!
//! Module map:
//!
//! * [`schemes`] — closed-form costs `t(N, p)`, the exact distribution of
//!   the test count for scheme D, and the cost derivative in `N`.
//! * [`executor`] — procedural execution on concrete status vectors, exact
//!   expectation by exhaustive enumeration, and seeded Monte Carlo. These
//!   are independent oracles for the closed forms.
//! * [`optimizer`] — optimal group size by brute-force scan, by closed-form
//!   candidate sets, and by bisection on the cost derivative.
//! * [`verifier`] — numerical certification of the inequalities behind the
//!   candidate sets, bundled into grid verification reports.
//! * [`grid`] — log-spaced and linear evaluation grids.

pub mod error;
pub mod executor;
pub mod grid;
pub mod optimizer;
pub mod schemes;
pub mod verifier;

mod bisect;

pub use error::{Error, Result};
pub use schemes::{samuels_cutoff, ungar_cutoff, CostPoint, Prevalence, SchemeId};
