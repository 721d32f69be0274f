//! Plot data for the transformed gain `g_α(r) = ln_{1/α} r` and its
//! Arrow–Pratt risk aversion.

use alphaleak::{arrow_pratt, transformed_gain, ArrowPrattMode};

use crate::table::Table;
use crate::{CliError, Result};

/// Order standing in for `α → ∞`, where `g_α(r)` tends to `r - 1`.
pub const INFINITY_PROXY: f64 = 1e6;

fn stage(what: String) -> impl FnOnce(alphaleak::Error) -> CliError {
    move |source| CliError::Stage { stage: what, source }
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 2 {
        return Err(CliError::Usage(format!("grid must be at least 2, got {grid}")));
    }
    Ok(())
}

/// Rows at `r = k/grid`, `k = 1..=grid`. Columns: `r`, one `g[α]` per
/// order, `g[inf]` evaluated at [`INFINITY_PROXY`], and with
/// `risk_aversion` one closed-form `A[α]` per order.
pub fn plot_gain(alphas: &[f64], grid: usize, risk_aversion: bool) -> Result<Table> {
    check_grid(grid)?;
    let mut columns = vec!["r".to_string()];
    columns.extend(alphas.iter().map(|a| format!("g[{a}]")));
    columns.push("g[inf]".into());
    if risk_aversion {
        columns.extend(alphas.iter().map(|a| format!("A[{a}]")));
    }
    let mut t = Table::new(columns);
    t.meta.push(("inf_proxy_alpha".into(), INFINITY_PROXY.into()));
    for k in 1..=grid {
        let r = k as f64 / grid as f64;
        let mut row = vec![r.into()];
        for &a in alphas.iter().chain([&INFINITY_PROXY]) {
            let g = transformed_gain(a, r).map_err(stage(format!("g at α={a}, r={r}")))?;
            row.push(g.into());
        }
        if risk_aversion {
            for &a in alphas {
                let v = arrow_pratt(a, r, ArrowPrattMode::Closed)
                    .map_err(stage(format!("risk aversion at α={a}, r={r}")))?;
                row.push(v.into());
            }
        }
        t.push(row);
    }
    Ok(t)
}

/// Closed-form and finite-difference Arrow–Pratt coefficients at `grid`
/// evenly spaced points of `[r_min, 1]`.
pub fn risk_aversion(alphas: &[f64], grid: usize, r_min: f64) -> Result<Table> {
    check_grid(grid)?;
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(CliError::Usage(format!("r-min must lie in (0, 1), got {r_min}")));
    }
    let mut columns = vec!["r".to_string()];
    for a in alphas {
        columns.push(format!("A_closed[{a}]"));
        columns.push(format!("A_fd[{a}]"));
    }
    let mut t = Table::new(columns);
    for k in 0..grid {
        let r = r_min + (1.0 - r_min) * k as f64 / (grid - 1) as f64;
        let mut row = vec![r.into()];
        for &a in alphas {
            for mode in [ArrowPrattMode::Closed, ArrowPrattMode::FiniteDiff] {
                let v = arrow_pratt(a, r, mode).map_err(stage(format!("risk aversion at α={a}, r={r}")))?;
                row.push(v.into());
            }
        }
        t.push(row);
    }
    Ok(t)
}
