//! Seeded identity checks. Every check becomes a record; computation errors
//! are failed records, not aborts.
//!
//! `abs_err` is the amount by which an equality or inequality is violated:
//! `|lhs - rhs|` for equalities, the one-sided excess for inequalities.
//! Relative tolerances are converted to absolute ones by scaling with
//! `max(|lhs|, |rhs|)`, so `pass ⇔ abs_err ≤ tolerance` in every record.

use std::collections::BTreeMap;
use std::time::Instant;

use alphaleak::{
    alpha_mi, alpha_mi_via_leakage, cond_renyi_entropy, cond_vulnerability, g_leakage,
    gibbs_optimum, grid_search, p_norm, posterior_vulnerability_hat, power_score_expectation,
    prior_vulnerability, q_log, random_channel, random_pmf, renyi_entropy, reverse_holder_check,
    shannon_measures, simplex_grid, Aggregator, Channel, Direction, Error, GainFunction,
    LeakageSpec, Method, MiVariant, OptimizerConfig, Pmf, Sense, VulnerabilityResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::table::{Cell, Table};
use crate::{CliError, Result};

pub const GIBBS_ORDERS: [f64; 4] = [0.25, 0.5, 2.0, 4.0];
pub const GIBBS_RESOLUTION: f64 = 5e-3;
pub const POWER_SCORE_ORDERS: [f64; 2] = [0.5, 2.0];
pub const HOLDER_EXPONENTS: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Alphabet sizes are drawn from `2..=max_size`.
    pub max_size: usize,
    pub alphas: Vec<f64>,
    /// Replaces every tolerance when set.
    pub tol_override: Option<f64>,
    /// Starting grid resolution for oracle checks; coarsened when a grid
    /// would exceed the oracle limit.
    pub grid_res: f64,
    pub optimizer: OptimizerConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            seed: 7,
            max_size: 3,
            alphas: vec![0.3, 0.6, 2.0, 4.0],
            tol_override: None,
            grid_res: 0.05,
            optimizer: OptimizerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub identity: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub records: Vec<Record>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> usize {
        self.records.iter().filter(|r| r.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.records.len() - self.passed()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    /// `(passed, failed)` per identity.
    pub fn by_identity(&self) -> BTreeMap<&str, (usize, usize)> {
        let mut out = BTreeMap::new();
        for r in &self.records {
            let e = out.entry(r.identity.as_str()).or_insert((0, 0));
            if r.pass {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
        out
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "identity", "instance", "lhs", "rhs", "abs_err", "tolerance", "pass", "error",
        ]);
        t.meta.push(("seed".into(), json!(self.seed)));
        t.meta.push(("trials".into(), json!(self.trials)));
        t.meta.push(("records".into(), json!(self.records.len())));
        t.meta.push(("passed".into(), json!(self.passed())));
        t.meta.push(("failed".into(), json!(self.failed())));
        let by: BTreeMap<&str, serde_json::Value> = self
            .by_identity()
            .into_iter()
            .map(|(k, (p, f))| (k, json!({"passed": p, "failed": f})))
            .collect();
        t.meta.push(("by_identity".into(), json!(by)));
        t.meta.push(("elapsed_s".into(), json!(self.seconds)));
        for r in &self.records {
            t.push(vec![
                r.identity.as_str().into(),
                r.instance.as_str().into(),
                r.lhs.into(),
                r.rhs.into(),
                r.abs_err.into(),
                r.tolerance.into(),
                r.pass.into(),
                r.error.clone().map_or(Cell::Empty, Cell::Text),
            ]);
        }
        t
    }
}

/// How `lhs` is compared with `rhs`.
#[derive(Debug, Clone, Copy)]
enum Check {
    /// `|lhs - rhs| ≤ tol · max(|lhs|, |rhs|)`.
    Rel(f64),
    /// `|lhs - rhs| ≤ tol`.
    Abs(f64),
    /// `lhs ≤ rhs + tol`.
    AtMost(f64),
}

struct Recorder<'a> {
    cfg: &'a VerifyConfig,
    records: Vec<Record>,
}

impl Recorder<'_> {
    fn check(
        &mut self,
        identity: impl Into<String>,
        instance: impl Into<String>,
        outcome: alphaleak::Result<(f64, f64, Check)>,
    ) {
        let (identity, instance) = (identity.into(), instance.into());
        let (lhs, rhs, abs_err, tol, error) = match outcome {
            Ok((lhs, rhs, check)) => {
                let (abs_err, tol) = match check {
                    Check::Rel(t) => ((lhs - rhs).abs(), t * lhs.abs().max(rhs.abs())),
                    Check::Abs(t) => ((lhs - rhs).abs(), t),
                    Check::AtMost(t) => ((lhs - rhs).max(0.0), t),
                };
                // NaN propagates through `max`/`abs` only sometimes; keep it.
                let abs_err = if lhs.is_nan() || rhs.is_nan() { f64::NAN } else { abs_err };
                (lhs, rhs, abs_err, tol, None)
            }
            Err(e) => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, Some(e.to_string())),
        };
        let tolerance = self.cfg.tol_override.unwrap_or(tol);
        self.records.push(Record {
            identity,
            instance,
            lhs,
            rhs,
            abs_err,
            tolerance,
            pass: error.is_none() && abs_err <= tolerance,
            error,
        });
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// `exp{∓H}` targets of the prior and conditional vulnerability for the
/// tuple of `variant`.
fn entropy_targets(v: MiVariant, p: &Pmf, w: &Channel, a: f64, cfg: &OptimizerConfig) -> alphaleak::Result<(f64, f64)> {
    let h_prior = match v {
        MiVariant::Shannon | MiVariant::AugustinCsiszar => renyi_entropy(p, 1.0)?,
        MiVariant::Arimoto | MiVariant::Hayashi => renyi_entropy(p, a)?,
        MiVariant::Sibson => renyi_entropy(p, 1.0 / a)?,
        MiVariant::LapidothPfister => renyi_entropy(p, a / (2.0 * a - 1.0))?,
    };
    let h_cond = match v {
        MiVariant::Shannon => shannon_measures(p, w)?.h_cond,
        _ => cond_renyi_entropy(v, p, w, a, Method::ClosedForm, cfg)?,
    };
    Ok(if v == MiVariant::Hayashi {
        (h_prior.exp(), h_cond.exp())
    } else {
        ((-h_prior).exp(), (-h_cond).exp())
    })
}

/// Runs `f` at `res`, doubling the resolution while the grid is too large.
fn adaptive_oracle<T>(
    cfg: &OptimizerConfig,
    res: f64,
    f: impl Fn(&OptimizerConfig) -> alphaleak::Result<T>,
) -> alphaleak::Result<(T, f64)> {
    let mut c = OptimizerConfig { grid_resolution: res, ..cfg.clone() };
    loop {
        match f(&c) {
            Err(Error::OracleTooLarge { .. }) if c.grid_resolution * 2.0 <= 0.5 => {
                c.grid_resolution *= 2.0;
            }
            other => return other.map(|v| (v, c.grid_resolution)),
        }
    }
}

fn prior_of(spec: &LeakageSpec, method: Method, cfg: &OptimizerConfig) -> alphaleak::Result<VulnerabilityResult> {
    prior_vulnerability(&spec.prior, &spec.gain, &spec.phi, spec.sense, method, cfg)
}

fn conditional_of(
    spec: &LeakageSpec,
    w: &Channel,
    method: Method,
    cfg: &OptimizerConfig,
) -> alphaleak::Result<VulnerabilityResult> {
    cond_vulnerability(&spec.prior, w, &spec.gain, &spec.phi, &spec.psi, spec.sense, method, cfg)
}

fn gibbs_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng, trial: usize) {
    let n = rng.random_range(2..=rec.cfg.max_size.min(3));
    let p = random_pmf(rng, n);
    let grid = match simplex_grid(n, GIBBS_RESOLUTION) {
        Ok(g) => g,
        Err(e) => return rec.check("gibbs_grid_upper_bound", format!("trial={trial}"), Err(e)),
    };
    for q in GIBBS_ORDERS {
        let inst = format!("trial={trial} nx={n} q={q}");
        let exact = match gibbs_optimum(&p, q) {
            Ok(g) => g,
            Err(e) => {
                rec.check("gibbs_grid_upper_bound", inst, Err(e));
                continue;
            }
        };
        let (mut best, mut arg) = (f64::NEG_INFINITY, 0);
        let mut worst = f64::INFINITY;
        for (i, pt) in grid.iter().enumerate() {
            let v: f64 = (0..n).map(|x| p.get(x) * q_log(pt.get(x), q).unwrap_or(f64::NAN)).sum();
            if v > best {
                best = v;
                arg = i;
            }
            if v.is_finite() {
                worst = worst.min(v);
            }
        }
        rec.check("gibbs_grid_upper_bound", inst.clone(), Ok((best, exact.value, Check::AtMost(1e-9))));
        let l1 = grid[arg].l1_distance(&exact.argmax);
        rec.check("gibbs_grid_argmax_l1", inst.clone(), l1.map(|d| (d, 0.0, Check::Abs(2e-2))));
        let range = exact.value.max(best) - worst;
        rec.check("gibbs_grid_value", inst, Ok((best, exact.value, Check::Abs(5e-3 * range))));
    }
}

fn theorem_checks(rec: &mut Recorder, p: &Pmf, w: &Channel, a: f64, v: MiVariant, inst: &str) {
    let cfg = rec.cfg.optimizer.clone();
    let spec = match LeakageSpec::for_variant(v, p, a) {
        Ok(s) => s,
        Err(e) => return rec.check("theorem_prior.closed", inst, Err(e)),
    };
    let targets = entropy_targets(v, p, w, a, &cfg);
    let (vp, vc) = match targets {
        Ok(t) => t,
        Err(e) => return rec.check("theorem_prior.closed", inst, Err(e)),
    };
    for (method, tol) in [(Method::ClosedForm, 1e-6), (Method::Optimize, 1e-3)] {
        let id = |side: &str| format!("theorem_{side}.{}", method.name());
        let prior = prior_of(&spec, method, &cfg).map(|r| (r.value, vp, Check::Rel(tol)));
        rec.check(id("prior"), inst, prior);
        let cond = conditional_of(&spec, w, method, &cfg).map(|r| (r.value, vc, Check::Rel(tol)));
        rec.check(id("conditional"), inst, cond);
    }
    // Oracle values are compared in φ-space, where the grid bound lives.
    let phi = spec.phi;
    let res = rec.cfg.grid_res;
    let oracle = |r: alphaleak::Result<(VulnerabilityResult, f64)>, target: f64| {
        r.map(|(out, used)| {
            let bound = out.residual + 1e-12;
            ((phi.forward(out.value), phi.forward(target), Check::Abs(bound)), used)
        })
    };
    let prior = oracle(adaptive_oracle(&cfg, res, |c| prior_of(&spec, Method::Oracle, c)), vp);
    let cond = oracle(adaptive_oracle(&cfg, res, |c| conditional_of(&spec, w, Method::Oracle, c)), vc);
    for (side, out) in [("prior", prior), ("conditional", cond)] {
        let (inst, out) = match out {
            Ok((chk, used)) => (format!("{inst} grid={used}"), Ok(chk)),
            Err(e) => (inst.to_string(), Err(e)),
        };
        rec.check(format!("theorem_{side}.oracle"), inst, out);
    }
    if spec.phi == spec.psi {
        let hat = posterior_vulnerability_hat(&spec.prior, w, &spec.gain, &spec.phi, &spec.psi, spec.sense, &cfg)
            .and_then(|hat| Ok((hat, conditional_of(&spec, w, Method::ClosedForm, &cfg)?.value, Check::Rel(1e-9))));
        rec.check("posterior_mean_equals_conditional", inst, hat);
    }
}

fn corollary_checks(rec: &mut Recorder, p: &Pmf, w: &Channel, a: f64, v: MiVariant, inst: &str) {
    let cfg = rec.cfg.optimizer.clone();
    let direct = match alpha_mi(v, p, w, a, Method::ClosedForm, &cfg) {
        Ok(d) => d,
        Err(e) => return rec.check("corollary_leakage_equals_mi.closed", inst, Err(e)),
    };
    let closed = alpha_mi_via_leakage(v, p, w, a, Method::ClosedForm, &cfg);
    let tol = 1e-6 * direct.abs().max(1.0);
    rec.check("corollary_leakage_equals_mi.closed", inst, closed.clone().map(|l| (l, direct, Check::Abs(tol))));
    let opt = alpha_mi_via_leakage(v, p, w, a, Method::Optimize, &cfg);
    rec.check("corollary_leakage_equals_mi.optimize", inst, opt.map(|l| (l, direct, Check::Abs(1e-3))));
    if v != MiVariant::Hayashi {
        // Every tuple but Hayashi's is in the gain sense.
        rec.check("gain_leakage_nonnegative", inst, closed.map(|l| (0.0, l, Check::AtMost(1e-9))));
    }
}

fn difference_checks(rec: &mut Recorder, p: &Pmf, w: &Channel, a: f64, inst: &str) {
    let cfg = rec.cfg.optimizer.clone();
    let cases = [
        (MiVariant::Sibson, 1.0 / a),
        (MiVariant::AugustinCsiszar, 1.0),
        (MiVariant::LapidothPfister, a / (2.0 * a - 1.0)),
    ];
    for (v, order) in cases {
        if !v.accepts(a) {
            continue;
        }
        let out = (|| {
            let i = alpha_mi(v, p, w, a, Method::ClosedForm, &cfg)?;
            let h = renyi_entropy(p, order)?;
            let hc = cond_renyi_entropy(v, p, w, a, Method::Optimize, &cfg)?;
            Ok((i, h - hc, Check::Abs(1e-4)))
        })();
        rec.check("difference_identity", format!("{inst} variant={v}"), out);
    }
}

fn leakage_sign_checks(rec: &mut Recorder, p: &Pmf, w: &Channel, inst: &str) {
    let cfg = rec.cfg.optimizer.clone();
    let tuples: Vec<(&str, alphaleak::Result<(Aggregator, GainFunction)>)> = vec![
        ("soft01/ln", Ok((Aggregator::log(), GainFunction::soft01()))),
        ("soft01/ln_0.5", Aggregator::q_log(0.5).map(|a| (a, GainFunction::soft01()))),
        ("soft01/ln_2", Aggregator::q_log(2.0).map(|a| (a, GainFunction::soft01()))),
        ("power_2/linear", GainFunction::power(2.0).map(|g| (Aggregator::linear(), g))),
    ];
    for (name, tuple) in tuples {
        let out = tuple.and_then(|(phi, gain)| {
            let spec = LeakageSpec {
                prior: p.clone(),
                phi,
                psi: phi,
                gain,
                sense: Sense::Gain,
            };
            g_leakage(&spec, w, Method::ClosedForm, &cfg)
        });
        rec.check("gain_leakage_nonnegative", format!("{inst} tuple={name}"), out.map(|l| (0.0, l, Check::AtMost(1e-9))));
    }
}

fn power_score_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng, trial: usize) {
    let n = rng.random_range(2..=rec.cfg.max_size);
    let p = random_pmf(rng, n);
    for a in POWER_SCORE_ORDERS {
        let inst = format!("trial={trial} nx={n} alpha={a}");
        let direction = if a > 1.0 { Direction::Maximize } else { Direction::Minimize };
        let out = (|| {
            let f = |q: &[Vec<f64>]| {
                Pmf::new(&q[0], false)
                    .and_then(|r| power_score_expectation(&p, &r, a))
                    .unwrap_or(f64::NAN)
            };
            let g = grid_search(f, &[n], direction, 0.01)?;
            let exact = p_norm(&p, a)?.powf(a);
            Ok((g.value, exact, Check::Abs(g.bound + 1e-12)))
        })();
        rec.check("power_score_optimum", inst, out);
    }
}

fn holder_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng, trial: usize) {
    for p in HOLDER_EXPONENTS {
        let inst = format!("trial={trial} p={p}");
        let a: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..5.0)).collect();
        let b: Vec<f64> = (0..4).map(|_| rng.random_range(0.01..5.0)).collect();
        let out = reverse_holder_check(&a, &b, p).map(|rep| {
            let slack = 1e-12 * rep.lhs.abs().max(rep.rhs.abs());
            // p > 1: lhs ≥ rhs; p < 1: lhs ≤ rhs.
            if p > 1.0 {
                (rep.rhs, rep.lhs, Check::AtMost(slack))
            } else {
                (rep.lhs, rep.rhs, Check::AtMost(slack))
            }
        });
        rec.check("reverse_holder_direction", inst.clone(), out);
        let c = rng.random_range(0.1..10.0);
        let a: Vec<f64> = b.iter().map(|v| c * v.powf(p / (1.0 - p))).collect();
        let out = reverse_holder_check(&a, &b, p).map(|rep| (rep.lhs, rep.rhs, Check::Rel(1e-9)));
        rec.check("reverse_holder_equality", inst, out);
    }
}

fn run_trial(cfg: &VerifyConfig, trial: usize) -> Vec<Record> {
    let mut rec = Recorder { cfg, records: Vec::new() };
    let mut rng = trial_rng(cfg.seed, trial);
    let nx = rng.random_range(2..=cfg.max_size);
    let ny = rng.random_range(2..=cfg.max_size);
    let p = random_pmf(&mut rng, nx);
    let w = random_channel(&mut rng, nx, ny);
    let base = format!("trial={trial} nx={nx} ny={ny}");
    let opt = &cfg.optimizer;

    theorem_checks(&mut rec, &p, &w, 1.0, MiVariant::Shannon, &format!("{base} variant=shannon"));
    leakage_sign_checks(&mut rec, &p, &w, &base);
    for &a in &cfg.alphas {
        for v in MiVariant::ALL.into_iter().filter(|&v| v != MiVariant::Shannon && v.accepts(a)) {
            let inst = format!("{base} variant={v} alpha={a}");
            theorem_checks(&mut rec, &p, &w, a, v, &inst);
            corollary_checks(&mut rec, &p, &w, a, v, &inst);
        }
        let inst = format!("{base} alpha={a}");
        difference_checks(&mut rec, &p, &w, a, &inst);
        if MiVariant::LapidothPfister.accepts(a) {
            let out = (|| {
                let lp = alpha_mi(MiVariant::LapidothPfister, &p, &w, a, Method::ClosedForm, opt)?;
                let s = alpha_mi(MiVariant::Sibson, &p, &w, a, Method::ClosedForm, opt)?;
                Ok((lp, s, Check::AtMost(1e-8)))
            })();
            rec.check("lp_below_sibson", inst, out);
        }
    }
    let shannon = shannon_measures(&p, &w).map(|m| m.i);
    for a in [1.0 - 1e-3, 1.0 + 1e-3] {
        for v in MiVariant::ALL.into_iter().filter(|&v| v != MiVariant::Shannon) {
            let out = shannon.clone().and_then(|i| {
                Ok((alpha_mi(v, &p, &w, a, Method::ClosedForm, opt)?, i, Check::Abs(1e-2)))
            });
            rec.check("continuity_at_one", format!("{base} variant={v} alpha={a}"), out);
        }
    }
    gibbs_checks(&mut rec, &mut rng, trial);
    power_score_checks(&mut rec, &mut rng, trial);
    holder_checks(&mut rec, &mut rng, trial);
    rec.records
}

/// Runs the identity suite. Trials run in parallel; each draws from its own
/// seeded stream, so the report does not depend on scheduling.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if !(2..=4).contains(&cfg.max_size) {
        return Err(CliError::Usage(format!(
            "alphabet size limit must lie in 2..=4, got {}",
            cfg.max_size
        )));
    }
    if let Some(t) = cfg.tol_override {
        if !(t >= 0.0) {
            return Err(CliError::Usage(format!("tolerance must be nonnegative, got {t}")));
        }
    }
    cfg.optimizer.validate().map_err(|source| CliError::Invalid {
        what: "optimizer configuration",
        source,
    })?;
    let start = Instant::now();
    let records = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Vec<_>>()
        .concat();
    Ok(VerifyReport {
        seed: cfg.seed,
        trials: cfg.trials,
        records,
        seconds: start.elapsed().as_secs_f64(),
    })
}
