//! Data series behind the four diagnostic figures. Plot rendering is out of
//! scope: each figure is a CSV table meant for an external plotting tool.
//!
//! 1. The three `g_m` curves across the whole pooling range, on a linear
//!    prevalence grid.
//! 2. The same columns concentrated near the origin on a log grid, where
//!    `g_0` creeps back up towards 1.
//! 3. The Sterrett candidate gap `f` between the crossing `p*` and the
//!    pooling cut-off.
//! 4. A raster of the region where modified Dorfman beats individual
//!    testing, with a companion `_brace` table pinning the continuous
//!    minimizer between its bracing curves.

use pooltest::grid::{linear, log_spaced};
use pooltest::optimizer::continuous_minimizer;
use pooltest::verifier::{g, in_region_a_d, p_star, sterrett_gap, GIndex};
use pooltest::{ungar_cutoff, Prevalence, Result, SchemeId};

use crate::output::{sig15, Table};

/// Largest group size in the figure-4 raster; covers the minimizer over the
/// plotted prevalence range, where `n*` stays below `sqrt(1/0.001) + 1 < 33`.
const RASTER_MAX_N: u64 = 40;

fn g_table(grid: Vec<f64>) -> Result<Table> {
    let mut table = Table::new(&["p", "g_minus1", "g_0", "g_1"]);
    for pv in grid {
        let p = Prevalence::new(pv)?;
        table.push(vec![
            sig15(pv),
            sig15(g(GIndex::MINUS_ONE, p)?),
            sig15(g(GIndex::ZERO, p)?),
            sig15(g(GIndex::ONE, p)?),
        ]);
    }
    Ok(table)
}

/// Figure 1: `g_{-1}`, `g_0`, `g_1` across the whole pooling range.
///
/// The sweep starts at 1e-4 rather than closer to 0: below that, `g_1 - 1`
/// drops under the 15-digit print resolution and the column would read as
/// exactly 1.
pub fn figure_1(points: usize) -> Result<Table> {
    g_table(linear(1e-4, ungar_cutoff() - 1e-9, points)?)
}

/// Figure 2: the same functions near the origin, log-spaced.
pub fn figure_2(points: usize) -> Result<Table> {
    g_table(log_spaced(1e-9, 5e-2, points)?)
}

/// Figure 3: the gap `f` on `(p*, cut-off)`, with the breakpoint `2/9`
/// injected so that its row is exact rather than grid-rounded.
pub fn figure_3(points: usize) -> Result<Table> {
    let mut grid = linear(p_star()? + 1e-6, ungar_cutoff() - 1e-9, points)?;
    let breakpoint = 2.0 / 9.0;
    let at = grid.partition_point(|&x| x < breakpoint);
    grid.insert(at, breakpoint);
    let mut table = Table::new(&["p", "f"]);
    for pv in grid {
        table.push(vec![sig15(pv), sig15(sterrett_gap(Prevalence::new(pv)?)?)]);
    }
    Ok(table)
}

/// Figure 4: the membership raster and its bracing-curve companion.
pub fn figure_4(points: usize) -> Result<(Table, Table)> {
    let grid = linear(1e-3, ungar_cutoff() - 1e-9, points)?;

    let mut raster = Table::new(&["p", "n", "in_A_D"]);
    for &pv in &grid {
        let p = Prevalence::new(pv)?;
        for n in 1..=RASTER_MAX_N {
            let inside = in_region_a_d(n as f64, p)?;
            raster.push(vec![
                sig15(pv),
                n.to_string(),
                (u8::from(inside)).to_string(),
            ]);
        }
    }

    let mut brace = Table::new(&["p", "sqrt_inv_p", "brace_lo", "brace_hi", "n_star"]);
    for &pv in &grid {
        let p = Prevalence::new(pv)?;
        let sqrt_inv = (1.0 / pv).sqrt();
        let root = continuous_minimizer(SchemeId::D, p)?;
        brace.push(vec![
            sig15(pv),
            sig15(sqrt_inv),
            sig15(sqrt_inv - pv),
            sig15(sqrt_inv + 1.0 - 2.5 * pv),
            sig15(root.x),
        ]);
    }
    Ok((raster, brace))
}
