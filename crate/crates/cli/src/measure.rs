//! One row per (variant, α): value, method, residual and wall time.

use std::time::Instant;

use alphaleak::{
    alpha_mi_estimate, g_leakage_detailed, Channel, LeakageSpec, Method, MiVariant,
    OptimizerConfig, Pmf,
};
use rayon::prelude::*;

use crate::table::{Cell, Table};
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRequest {
    pub variants: Vec<MiVariant>,
    pub alphas: Vec<f64>,
    pub method: Method,
    /// Compute each value as the leakage of the matching tuple.
    pub via_leakage: bool,
    /// Drop (variant, α) pairs outside the variant's domain instead of
    /// failing. Used by `sweep`.
    pub skip_invalid: bool,
    pub cfg: OptimizerConfig,
}

impl MeasureRequest {
    pub fn new(variants: Vec<MiVariant>, alphas: Vec<f64>) -> Self {
        Self {
            variants,
            alphas,
            method: Method::ClosedForm,
            via_leakage: false,
            skip_invalid: false,
            cfg: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRow {
    pub variant: MiVariant,
    /// `None` for Shannon, which has no order.
    pub alpha: Option<f64>,
    pub value: f64,
    pub method: Method,
    pub residual: f64,
    pub seconds: f64,
}

fn tasks(req: &MeasureRequest) -> Result<Vec<(MiVariant, Option<f64>)>> {
    let mut out = Vec::new();
    for &v in &req.variants {
        if v == MiVariant::Shannon {
            out.push((v, None));
            continue;
        }
        if req.alphas.is_empty() {
            return Err(CliError::Usage(format!("variant {v} needs at least one order (--alpha)")));
        }
        for &a in &req.alphas {
            if v.accepts(a) {
                out.push((v, Some(a)));
            } else if !req.skip_invalid {
                return Err(CliError::Usage(format!("variant {v} does not accept α={a}")));
            }
        }
    }
    Ok(out)
}

fn evaluate(
    variant: MiVariant,
    alpha: f64,
    p: &Pmf,
    w: &Channel,
    req: &MeasureRequest,
) -> alphaleak::Result<(f64, Method, f64)> {
    if req.via_leakage {
        let spec = LeakageSpec::for_variant(variant, p, alpha)?;
        let out = g_leakage_detailed(&spec, w, req.method, &req.cfg)?;
        let residual = out.prior.residual.max(out.conditional.residual);
        Ok((out.leakage, out.conditional.method, residual))
    } else {
        let e = alpha_mi_estimate(variant, p, w, alpha, req.method, &req.cfg)?;
        Ok((e.value, e.method, e.residual))
    }
}

/// Evaluates every requested pair in parallel; rows keep request order.
pub fn run_measure(p: &Pmf, w: &Channel, req: &MeasureRequest) -> Result<Vec<MeasureRow>> {
    req.cfg.validate().map_err(|source| CliError::Invalid {
        what: "optimizer configuration",
        source,
    })?;
    tasks(req)?
        .into_par_iter()
        .map(|(variant, alpha)| {
            let start = Instant::now();
            let (value, method, residual) = evaluate(variant, alpha.unwrap_or(1.0), p, w, req)
                .map_err(|source| CliError::Stage {
                    stage: match alpha {
                        Some(a) => format!("variant {variant} at α={a}"),
                        None => format!("variant {variant}"),
                    },
                    source,
                })?;
            Ok(MeasureRow {
                variant,
                alpha,
                value,
                method,
                residual,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

pub fn measure_table(rows: &[MeasureRow], req: &MeasureRequest) -> Table {
    let mut t = Table::new(["variant", "alpha", "value", "method", "residual", "wall_time_s"]);
    t.meta.push(("quantity".into(), if req.via_leakage { "g-leakage" } else { "alpha-mi" }.into()));
    for r in rows {
        t.push(vec![
            r.variant.name().into(),
            Cell::from(r.alpha),
            r.value.into(),
            r.method.name().into(),
            r.residual.into(),
            r.seconds.into(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shannon_ignores_orders_and_invalid_pairs_are_reported() {
        let (p, w) = (Pmf::uniform(2), Channel::bsc(0.1).unwrap());
        let mut req = MeasureRequest::new(vec![MiVariant::Shannon, MiVariant::LapidothPfister], vec![0.4, 2.0]);
        assert!(matches!(run_measure(&p, &w, &req), Err(CliError::Usage(_))));
        req.skip_invalid = true;
        let rows = run_measure(&p, &w, &req).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].alpha, None);
        assert_eq!(rows[1].alpha, Some(2.0));
    }
}
