//! Gain functions, generalized vulnerabilities and g-leakage.
//!
//! An adversary picks a guess `r ∈ Δ_X` (after seeing `y`, a decision rule
//! `δ(y) = r(·|y)`) and scores `g(x, r)`. Scores are averaged with
//! Kolmogorov–Nagumo means: `ψ` over outputs for each secret, then `φ` over
//! secrets:
//!
//! ```text
//! V(X|Y) = opt_δ φ⁻¹( Σ_x p(x) φ(ψ⁻¹( Σ_y W(y|x) ψ(g(x, δ(y))) )) )
//! ```
//!
//! `opt` is `max` for gains and `min` for losses. Optimization happens on the
//! inner sum `S = Σ_x p(x) φ(ψ⁻¹(…))`; because `φ⁻¹` reverses order when `φ`
//! is decreasing, the direction on `S` is:
//!
//! | sense | φ increasing | φ decreasing |
//! |-------|--------------|--------------|
//! | gain  | maximize `S` | minimize `S` |
//! | loss  | minimize `S` | maximize `S` |
//!
//! When `φ = ψ` the objective splits over outputs, and each output is
//! optimized against its posterior with the transformed score `φ∘g`.
//! Otherwise the `|Y|` simplices are optimized jointly by exponentiated
//! gradient from the posterior family.
//!
//! Leakage is `ln(V(X|Y)/V(X))` for gains and `ln(V(X)/V(X|Y))` for losses,
//! so both are nonnegative.

use crate::error::{invalid_order, Error, Result};
use crate::optimize::{
    eg_optimize, eg_optimize_from, grid_search, Direction, Objective, OptimizerConfig,
    ORACLE_MAX_ALPHABET,
};
use crate::qcalc::{gibbs_value, is_unit, ln_q, Aggregator};
use crate::renyi::{check_order, posterior_family, Method, MiVariant};
use crate::simplex::{compose_joint, power_sum, tilt_slice, Channel, DecisionRule, Pmf};

/// Whether larger scores are better for the adversary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Gain,
    Loss,
}

impl Sense {
    fn direction(self) -> Direction {
        match self {
            Sense::Gain => Direction::Maximize,
            Sense::Loss => Direction::Minimize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainKind {
    /// `r(x)`.
    Soft01,
    /// `α r(x)^{α-1} + (1-α) Σ_x' r(x')^α`.
    Power(f64),
    /// `ln_{1/α} r(x)`; `α = ∞` gives `r(x) - 1`.
    Transformed(f64),
    /// `Power(α)^{1/(1-α)}`.
    PowerLoss(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainFunction {
    kind: GainKind,
}

fn check_score_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() && !is_unit(alpha) {
        Ok(())
    } else {
        Err(invalid_order(
            alpha,
            "score order must lie in (0,1) ∪ (1,∞)",
        ))
    }
}

impl GainFunction {
    pub fn soft01() -> Self {
        Self {
            kind: GainKind::Soft01,
        }
    }

    pub fn power(alpha: f64) -> Result<Self> {
        check_score_order(alpha)?;
        Ok(Self {
            kind: GainKind::Power(alpha),
        })
    }

    /// `ln_{1/α} r(x)`; `alpha` may be `f64::INFINITY`.
    pub fn transformed(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid_order(
                alpha,
                "transformed gain order must be positive",
            ));
        }
        Ok(Self {
            kind: GainKind::Transformed(alpha),
        })
    }

    pub fn power_loss(alpha: f64) -> Result<Self> {
        check_score_order(alpha)?;
        Ok(Self {
            kind: GainKind::PowerLoss(alpha),
        })
    }

    pub fn kind(&self) -> GainKind {
        self.kind
    }

    /// The natural sense: the power score is a gain for `α > 1` and a loss
    /// for `α < 1`; the power loss is always a loss.
    pub fn sense(&self) -> Sense {
        match self.kind {
            GainKind::Soft01 | GainKind::Transformed(_) => Sense::Gain,
            GainKind::Power(a) if a > 1.0 => Sense::Gain,
            GainKind::Power(_) | GainKind::PowerLoss(_) => Sense::Loss,
        }
    }

    /// Unchecked score; may be `-∞` or NaN on the boundary.
    pub(crate) fn eval(&self, x: usize, r: &[f64]) -> f64 {
        match self.kind {
            GainKind::Soft01 => r[x],
            GainKind::Power(a) => power_score(x, r, a),
            GainKind::Transformed(a) => transformed_raw(a, r[x]),
            GainKind::PowerLoss(a) => power_score(x, r, a).powf(1.0 / (1.0 - a)),
        }
    }

    /// Overwrites `out` with `∇_r g(x, r)`.
    pub(crate) fn gradient(&self, x: usize, r: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        match self.kind {
            GainKind::Soft01 => out[x] = 1.0,
            GainKind::Power(a) => power_score_gradient(x, r, a, 1.0, out),
            GainKind::Transformed(a) => {
                out[x] = if a.is_infinite() {
                    1.0
                } else {
                    r[x].powf(-1.0 / a)
                };
            }
            GainKind::PowerLoss(a) => {
                let f = power_score(x, r, a);
                let e = 1.0 / (1.0 - a);
                power_score_gradient(x, r, a, e * f.powf(e - 1.0), out);
            }
        }
    }
}

fn transformed_raw(alpha: f64, t: f64) -> f64 {
    if alpha.is_infinite() {
        t - 1.0
    } else {
        ln_q(t, 1.0 / alpha)
    }
}

/// `ln_{1/α} t`, with `α = ∞` giving `t - 1`.
///
/// ```
/// use alphaleak::transformed_gain;
///
/// assert_eq!(transformed_gain(3.0, 1.0).unwrap(), 0.0);
/// assert_eq!(transformed_gain(f64::INFINITY, 0.25).unwrap(), -0.75);
/// ```
pub fn transformed_gain(alpha: f64, t: f64) -> Result<f64> {
    gain_eval_raw(&GainFunction::transformed(alpha)?, 0, &[t])
}

/// The power score `α r(x)^{α-1} + (1-α) Σ r^α`.
pub(crate) fn power_score(x: usize, r: &[f64], alpha: f64) -> f64 {
    alpha * r[x].powf(alpha - 1.0) + (1.0 - alpha) * power_sum(r, alpha)
}

/// Adds `weight · ∇_r f_α(x, r)` to `out`.
pub(crate) fn power_score_gradient(x: usize, r: &[f64], alpha: f64, weight: f64, out: &mut [f64]) {
    let c = weight * alpha * (1.0 - alpha);
    for (o, &rv) in out.iter_mut().zip(r) {
        *o += c * rv.powf(alpha - 1.0);
    }
    out[x] += weight * alpha * (alpha - 1.0) * r[x].powf(alpha - 2.0);
}

fn gain_eval_raw(g: &GainFunction, x: usize, r: &[f64]) -> Result<f64> {
    let v = g.eval(x, r);
    if v.is_nan() {
        return Err(Error::DomainError(format!("score undefined at symbol {x}")));
    }
    if v == f64::NEG_INFINITY {
        return Err(Error::DomainError(format!(
            "score is -∞ at symbol {x} (zero guess probability)"
        )));
    }
    Ok(v)
}

/// Evaluates `g(x, r)`.
///
/// ```
/// use alphaleak::{gain_eval, make_pmf, GainFunction};
///
/// let r = make_pmf(&[0.7, 0.3], false).unwrap();
/// assert_eq!(gain_eval(&GainFunction::soft01(), 0, &r).unwrap(), 0.7);
/// ```
pub fn gain_eval(g: &GainFunction, x: usize, r: &Pmf) -> Result<f64> {
    if x >= r.len() {
        return Err(Error::DimensionMismatch {
            what: "secret symbol index",
            expected: r.len(),
            found: x,
        });
    }
    gain_eval_raw(g, x, r.probs())
}

/// `E_p[f_α(X, r)]`, the expected power score of guess `r`.
pub fn power_score_expectation(p: &Pmf, r: &Pmf, alpha: f64) -> Result<f64> {
    check_score_order(alpha)?;
    if p.len() != r.len() {
        return Err(Error::DimensionMismatch {
            what: "guess alphabet",
            expected: p.len(),
            found: r.len(),
        });
    }
    Ok((0..p.len())
        .filter(|&x| p.get(x) > 0.0)
        .map(|x| p.get(x) * power_score(x, r.probs(), alpha))
        .sum())
}

/// `φ(g(x, r))` and its gradient in `r`. Two pairings are evaluated through
/// their composition, which stays finite where `g` alone may not: a
/// logarithmic `φ` with the soft 0-1 score, and `ln_α` with the power loss.
struct Scored<'a> {
    phi: &'a Aggregator,
    gain: &'a GainFunction,
}

impl Scored<'_> {
    /// Base generator order when `φ∘g` reduces to `s·ln_q r(x) + b`.
    fn log_of_guess(&self) -> Option<f64> {
        match (self.phi.log_order(), self.gain.kind) {
            (Some(q), GainKind::Soft01) => Some(q),
            (None, GainKind::Transformed(a)) if a.is_finite() => Some(1.0 / a),
            _ => None,
        }
    }

    fn matched_power_loss(&self) -> Option<f64> {
        match (self.phi.log_order(), self.gain.kind) {
            (Some(q), GainKind::PowerLoss(a)) if (q - a).abs() <= 1e-12 => Some(a),
            _ => None,
        }
    }

    fn value(&self, x: usize, r: &[f64]) -> f64 {
        let (s, b) = (self.phi.scale(), self.phi.offset());
        if let Some(q) = self.log_of_guess() {
            return s * ln_q(r[x], q) + b;
        }
        if let Some(a) = self.matched_power_loss() {
            return s * (power_score(x, r, a) - 1.0) / (1.0 - a) + b;
        }
        self.phi.forward(self.gain.eval(x, r))
    }

    /// Adds `weight · ∇_r φ(g(x, r))` to `out`; `scratch` has the length of `r`.
    fn add_gradient(&self, x: usize, r: &[f64], weight: f64, out: &mut [f64], scratch: &mut [f64]) {
        let s = self.phi.scale();
        if let Some(q) = self.log_of_guess() {
            out[x] += weight * s * r[x].powf(-q);
            return;
        }
        if let Some(a) = self.matched_power_loss() {
            power_score_gradient(x, r, a, weight * s / (1.0 - a), out);
            return;
        }
        let g = self.gain.eval(x, r);
        let d = weight * self.phi.derivative(g);
        self.gain.gradient(x, r, scratch);
        for (o, &v) in out.iter_mut().zip(scratch.iter()) {
            *o += d * v;
        }
    }
}

/// Optimal `Σ_x w(x) β(g(x, r))` in the base direction of `sense`, where `β`
/// is the unscaled base generator of `phi`, with an optimizing guess. `w`
/// must have positive mass.
fn slice_closed_form(
    phi: &Aggregator,
    gain: &GainFunction,
    sense: Sense,
    w: &[f64],
) -> Option<(f64, Vec<f64>)> {
    let m: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|v| v / m).collect();
    let vertex = |p: &[f64]| {
        let (best, top) =
            p.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        let mut r = vec![0.0; p.len()];
        r[best] = 1.0;
        (top, r)
    };
    let gibbs = |q: f64| -> (f64, Vec<f64>) {
        let arg = if is_unit(q) {
            p.clone()
        } else {
            tilt_slice(&p, 1.0 / q)
        };
        (m * gibbs_value(&p, q), arg)
    };
    match (phi.log_order(), gain.kind, sense) {
        (Some(q), GainKind::Soft01, Sense::Gain) if q > 0.0 => Some(gibbs(q)),
        (None, GainKind::Soft01, Sense::Gain) => {
            let (top, r) = vertex(&p);
            Some((m * top, r))
        }
        (None, GainKind::Transformed(a), Sense::Gain) => {
            if a.is_infinite() {
                let (top, r) = vertex(&p);
                Some((m * (top - 1.0), r))
            } else {
                Some(gibbs(1.0 / a))
            }
        }
        (None, GainKind::Power(a), Sense::Gain) if a > 1.0 => Some((m * power_sum(&p, a), p)),
        (None, GainKind::Power(a), Sense::Loss) if a < 1.0 => Some((m * power_sum(&p, a), p)),
        (Some(q), GainKind::PowerLoss(a), Sense::Loss) if (q - a).abs() <= 1e-12 => {
            Some((m * (power_sum(&p, a) - 1.0) / (1.0 - a), p))
        }
        _ => None,
    }
}

/// A computed vulnerability with its optimal decision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct VulnerabilityResult {
    pub value: f64,
    /// One component per output; the prior vulnerability has a single one.
    pub rule: DecisionRule,
    pub method: Method,
    /// Optimizer gap for `optimize`. For `oracle`, a bound on the error of
    /// the aggregated objective `Σ φ(…)` before `φ⁻¹` is applied.
    pub residual: f64,
}

/// `φ`-space direction for the given sense.
fn phi_direction(phi: &Aggregator, sense: Sense) -> Direction {
    let base = sense.direction();
    if phi.is_increasing() {
        base
    } else {
        base.flip()
    }
}

struct SliceOutcome {
    /// Optimal `Σ_x w(x) φ(g(x, r))`.
    value: f64,
    guess: Vec<f64>,
    method: Method,
    residual: f64,
}

/// Optimizes `Σ_x w(x) φ(g(x, r))` over `r`.
fn optimize_slice(
    phi: &Aggregator,
    gain: &GainFunction,
    sense: Sense,
    w: &[f64],
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<SliceOutcome> {
    let n = w.len();
    if method == Method::ClosedForm {
        if let Some((b, guess)) = slice_closed_form(phi, gain, sense, w) {
            let m: f64 = w.iter().sum();
            return Ok(SliceOutcome {
                value: phi.scale() * b + phi.offset() * m,
                guess,
                method,
                residual: 0.0,
            });
        }
    }
    let scored = Scored { phi, gain };
    let direction = phi_direction(phi, sense);
    let value = |r: &[f64]| -> f64 {
        w.iter()
            .enumerate()
            .filter(|(_, &wx)| wx > 0.0)
            .map(|(x, &wx)| wx * scored.value(x, r))
            .sum()
    };
    if method == Method::Oracle {
        if n > ORACLE_MAX_ALPHABET {
            return Err(oracle_too_large(n));
        }
        let out = grid_search(
            |pt: &[Vec<f64>]| value(&pt[0]),
            &[n],
            direction,
            cfg.grid_resolution,
        )?;
        return Ok(SliceOutcome {
            value: out.value,
            guess: out.point.into_iter().next().expect("one block"),
            method,
            residual: out.bound,
        });
    }
    let objective = SliceObjective { scored: &scored, w };
    let out = eg_optimize(&objective, &[n], direction, cfg)?;
    Ok(SliceOutcome {
        value: out.value,
        guess: out.point.into_iter().next().expect("one block"),
        method: Method::Optimize,
        residual: out.residual,
    })
}

fn oracle_too_large(n: usize) -> Error {
    Error::OracleTooLarge {
        count: n as u128 * crate::optimize::ORACLE_LIMIT,
        limit: crate::optimize::ORACLE_LIMIT,
    }
}

struct SliceObjective<'a> {
    scored: &'a Scored<'a>,
    w: &'a [f64],
}

impl Objective for SliceObjective<'_> {
    fn value(&self, pt: &[Vec<f64>]) -> f64 {
        self.w
            .iter()
            .enumerate()
            .filter(|(_, &wx)| wx > 0.0)
            .map(|(x, &wx)| wx * self.scored.value(x, &pt[0]))
            .sum()
    }

    fn gradient(&self, pt: &[Vec<f64>], grad: &mut [Vec<f64>]) {
        let r = &pt[0];
        let mut scratch = vec![0.0; r.len()];
        grad[0].iter_mut().for_each(|v| *v = 0.0);
        for (x, &wx) in self.w.iter().enumerate() {
            if wx > 0.0 {
                self.scored
                    .add_gradient(x, r, wx, &mut grad[0], &mut scratch);
            }
        }
    }
}

fn check_finite(value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DegenerateVulnerability(value))
    }
}

/// Generalized prior vulnerability `opt_r φ⁻¹(Σ_x p(x) φ(g(x, r)))`.
///
/// Closed forms cover the soft 0-1 score under logarithmic means (the
/// generalized Gibbs inequality), the power score under the arithmetic mean,
/// and the power loss under the matching `ln_α` mean. Other combinations, and
/// `Method::Optimize`, use exponentiated gradient.
///
/// ```
/// use alphaleak::{make_pmf, prior_vulnerability, Aggregator, GainFunction, Method, OptimizerConfig, Sense};
///
/// let p = make_pmf(&[0.8, 0.2], false).unwrap();
/// let phi = Aggregator::q_log(0.5).unwrap();
/// let v = prior_vulnerability(&p, &GainFunction::soft01(), &phi, Sense::Gain, Method::ClosedForm, &OptimizerConfig::default()).unwrap();
/// assert!((v.value - 0.68).abs() < 1e-12);
/// ```
pub fn prior_vulnerability(
    p: &Pmf,
    g: &GainFunction,
    phi: &Aggregator,
    sense: Sense,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<VulnerabilityResult> {
    cfg.validate()?;
    let out = optimize_slice(phi, g, sense, p.probs(), method, cfg)?;
    Ok(VulnerabilityResult {
        value: check_finite(phi.inverse(out.value))?,
        rule: DecisionRule::from_raw(vec![out.guess]),
        method: out.method,
        residual: out.residual,
    })
}

/// Rule objective `Σ_x p(x) φ(ψ⁻¹(Σ_y W(y|x) ψ(g(x, r_y))))`.
struct CoupledVulnerability<'a> {
    p: &'a [f64],
    w: &'a Channel,
    phi: &'a Aggregator,
    psi: &'a Aggregator,
    inner: Scored<'a>,
}

impl CoupledVulnerability<'_> {
    fn inner_sum(&self, x: usize, r: &[Vec<f64>]) -> f64 {
        self.w
            .row(x)
            .iter()
            .zip(r)
            .filter(|(&wy, _)| wy > 0.0)
            .map(|(&wy, ry)| wy * self.inner.value(x, ry))
            .sum()
    }
}

impl Objective for CoupledVulnerability<'_> {
    fn value(&self, r: &[Vec<f64>]) -> f64 {
        self.p
            .iter()
            .enumerate()
            .filter(|(_, &px)| px > 0.0)
            .map(|(x, &px)| px * self.phi.compose_inverse(self.psi, self.inner_sum(x, r)))
            .sum()
    }

    fn gradient(&self, r: &[Vec<f64>], grad: &mut [Vec<f64>]) {
        grad.iter_mut()
            .for_each(|b| b.iter_mut().for_each(|v| *v = 0.0));
        let mut scratch = vec![0.0; self.p.len()];
        for (x, &px) in self.p.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let t = self.inner_sum(x, r);
            let outer = px * self.phi.compose_inverse_derivative(self.psi, t);
            for (y, &wy) in self.w.row(x).iter().enumerate() {
                if wy > 0.0 {
                    self.inner
                        .add_gradient(x, &r[y], outer * wy, &mut grad[y], &mut scratch);
                }
            }
        }
    }
}

fn check_channel(p: &Pmf, w: &Channel) -> Result<()> {
    if p.len() != w.nx() {
        return Err(Error::DimensionMismatch {
            what: "channel input alphabet",
            expected: w.nx(),
            found: p.len(),
        });
    }
    Ok(())
}

/// Generalized conditional vulnerability (see the module docs for the
/// formula and the optimization direction).
///
/// `Method::ClosedForm` applies per-output closed forms when `φ = ψ` and
/// falls back to exponentiated gradient otherwise; the result records which
/// method produced it.
#[allow(clippy::too_many_arguments)]
pub fn cond_vulnerability(
    p: &Pmf,
    w: &Channel,
    g: &GainFunction,
    phi: &Aggregator,
    psi: &Aggregator,
    sense: Sense,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<VulnerabilityResult> {
    check_channel(p, w)?;
    cfg.validate()?;
    let joint = compose_joint(p, w)?;
    let (nx, ny) = (w.nx(), w.ny());
    if method == Method::Oracle && (nx > ORACLE_MAX_ALPHABET || ny > ORACLE_MAX_ALPHABET) {
        return Err(oracle_too_large(nx.max(ny)));
    }

    if phi == psi {
        let mut total = 0.0;
        let mut rule = Vec::with_capacity(ny);
        let mut used = method;
        let mut residual: f64 = 0.0;
        for y in 0..ny {
            if joint.p_y()[y] == 0.0 {
                rule.push(vec![1.0 / nx as f64; nx]);
                continue;
            }
            let slice: Vec<f64> = joint.matrix().iter().map(|row| row[y]).collect();
            let out = optimize_slice(phi, g, sense, &slice, method, cfg)?;
            total += out.value;
            // Grid bounds add across slices; optimizer gaps are relative.
            residual = match out.method {
                Method::Oracle => residual + out.residual,
                _ => residual.max(out.residual),
            };
            if out.method != Method::ClosedForm {
                used = out.method;
            }
            rule.push(out.guess);
        }
        return Ok(VulnerabilityResult {
            value: check_finite(phi.inverse(total))?,
            rule: DecisionRule::from_raw(rule),
            method: used,
            residual,
        });
    }

    let objective = CoupledVulnerability {
        p: p.probs(),
        w,
        phi,
        psi,
        inner: Scored { phi: psi, gain: g },
    };
    let direction = phi_direction(phi, sense);
    let (s, rule, used, residual) = if method == Method::Oracle {
        let out = grid_search(
            |r: &[Vec<f64>]| objective.value(r),
            &vec![nx; ny],
            direction,
            cfg.grid_resolution,
        )?;
        (out.value, out.point, Method::Oracle, out.bound)
    } else {
        let out = eg_optimize_from(&objective, posterior_family(&joint), direction, cfg)?;
        (out.value, out.point, Method::Optimize, out.residual)
    };
    Ok(VulnerabilityResult {
        value: check_finite(phi.inverse(s))?,
        rule: DecisionRule::from_raw(rule),
        method: used,
        residual,
    })
}

/// `ψ`-mean over outputs of the optimal per-posterior `φ`-vulnerability:
/// `ψ⁻¹(Σ_y p_Y(y) ψ(V_φ(X | Y = y)))`.
pub fn posterior_vulnerability_hat(
    p: &Pmf,
    w: &Channel,
    g: &GainFunction,
    phi: &Aggregator,
    psi: &Aggregator,
    sense: Sense,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    check_channel(p, w)?;
    let joint = compose_joint(p, w)?;
    let mut acc = 0.0;
    for y in 0..w.ny() {
        let Some(post) = joint.posterior(y) else {
            continue;
        };
        let post = Pmf::from_normalized(joint.x_labels().to_vec(), post.to_vec());
        let v = prior_vulnerability(&post, g, phi, sense, Method::ClosedForm, cfg)?.value;
        acc += joint.p_y()[y] * psi.forward(v);
    }
    check_finite(psi.inverse(acc))
}

/// The tuple `(p, φ, ψ, g)` together with the optimization sense.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageSpec {
    pub prior: Pmf,
    pub phi: Aggregator,
    pub psi: Aggregator,
    pub gain: GainFunction,
    pub sense: Sense,
}

impl LeakageSpec {
    /// The tuple whose leakage equals the α-mutual information of `variant`.
    ///
    /// | variant          | prior             | φ                | ψ         | score          |
    /// |------------------|-------------------|------------------|-----------|----------------|
    /// | Shannon          | p                 | ln               | ln        | soft 0-1       |
    /// | Arimoto          | p                 | ln_{1/α}         | ln_{1/α}  | soft 0-1       |
    /// | Sibson           | tilt(p, 1/α)      | ln_{1/α}         | ln_{1/α}  | soft 0-1       |
    /// | Augustin–Csiszár | p                 | ln               | ln_{1/α}  | soft 0-1       |
    /// | Hayashi          | p                 | ln_α             | ln_α      | power loss (α) |
    /// | Lapidoth–Pfister | tilt(p, α/(2α-1)) | ln_{α/(2α-1)}    | ln_{1/α}  | soft 0-1       |
    pub fn for_variant(variant: MiVariant, p: &Pmf, alpha: f64) -> Result<Self> {
        check_order(variant, alpha)?;
        let soft = GainFunction::soft01();
        let spec =
            |prior: Pmf, phi: Aggregator, psi: Aggregator, gain: GainFunction, sense: Sense| Self {
                prior,
                phi,
                psi,
                gain,
                sense,
            };
        Ok(match variant {
            MiVariant::Shannon => spec(
                p.clone(),
                Aggregator::log(),
                Aggregator::log(),
                soft,
                Sense::Gain,
            ),
            MiVariant::Arimoto => {
                let a = Aggregator::q_log(1.0 / alpha)?;
                spec(p.clone(), a, a, soft, Sense::Gain)
            }
            MiVariant::Sibson => {
                let a = Aggregator::q_log(1.0 / alpha)?;
                spec(p.tilt(1.0 / alpha)?, a, a, soft, Sense::Gain)
            }
            MiVariant::AugustinCsiszar => spec(
                p.clone(),
                Aggregator::log(),
                Aggregator::q_log(1.0 / alpha)?,
                soft,
                Sense::Gain,
            ),
            MiVariant::Hayashi => {
                let a = Aggregator::q_log(alpha)?;
                spec(
                    p.clone(),
                    a,
                    a,
                    GainFunction::power_loss(alpha)?,
                    Sense::Loss,
                )
            }
            MiVariant::LapidothPfister => {
                let order = alpha / (2.0 * alpha - 1.0);
                spec(
                    p.tilt(order)?,
                    Aggregator::q_log(order)?,
                    Aggregator::q_log(1.0 / alpha)?,
                    soft,
                    Sense::Gain,
                )
            }
        })
    }
}

/// Leakage with both vulnerabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageResult {
    pub leakage: f64,
    pub prior: VulnerabilityResult,
    pub conditional: VulnerabilityResult,
}

/// Generalized multiplicative g-leakage with both vulnerabilities.
pub fn g_leakage_detailed(
    spec: &LeakageSpec,
    w: &Channel,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<LeakageResult> {
    let prior = prior_vulnerability(&spec.prior, &spec.gain, &spec.phi, spec.sense, method, cfg)?;
    let conditional = cond_vulnerability(
        &spec.prior,
        w,
        &spec.gain,
        &spec.phi,
        &spec.psi,
        spec.sense,
        method,
        cfg,
    )?;
    for v in [prior.value, conditional.value] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::DegenerateVulnerability(v));
        }
    }
    let leakage = match spec.sense {
        Sense::Gain => (conditional.value / prior.value).ln(),
        Sense::Loss => (prior.value / conditional.value).ln(),
    };
    Ok(LeakageResult {
        leakage,
        prior,
        conditional,
    })
}

/// `ln(V(X|Y)/V(X))` for gains, `ln(V(X)/V(X|Y))` for losses.
pub fn g_leakage(
    spec: &LeakageSpec,
    w: &Channel,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    g_leakage_detailed(spec, w, method, cfg).map(|r| r.leakage)
}

/// α-mutual information computed as the leakage of
/// [`LeakageSpec::for_variant`].
///
/// ```
/// use alphaleak::{alpha_mi_via_leakage, Channel, Method, MiVariant, OptimizerConfig, Pmf};
///
/// let (p, w) = (Pmf::uniform(2), Channel::bsc(0.1).unwrap());
/// let l = alpha_mi_via_leakage(MiVariant::Arimoto, &p, &w, 2.0, Method::ClosedForm, &OptimizerConfig::default()).unwrap();
/// assert!((l - 0.49470).abs() < 1e-5);
/// ```
pub fn alpha_mi_via_leakage(
    variant: MiVariant,
    p: &Pmf,
    w: &Channel,
    alpha: f64,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    check_channel(p, w)?;
    let spec = LeakageSpec::for_variant(variant, p, alpha)?;
    g_leakage(&spec, w, method, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowPrattMode {
    Closed,
    FiniteDiff,
}

/// Finite-difference step for [`arrow_pratt`].
pub const ARROW_PRATT_STEP: f64 = 1e-4;

/// Absolute risk aversion `-g''(r)/g'(r)` of `g(r) = ln_{1/α} r`, which is
/// `1/(α r)`.
///
/// ```
/// use alphaleak::{arrow_pratt, ArrowPrattMode};
///
/// assert_eq!(arrow_pratt(2.0, 0.5, ArrowPrattMode::Closed).unwrap(), 1.0);
/// ```
pub fn arrow_pratt(alpha: f64, r: f64, mode: ArrowPrattMode) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid_order(alpha, "order must be positive and finite"));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::DomainError(format!(
            "guess probability {r} outside (0, 1]"
        )));
    }
    match mode {
        ArrowPrattMode::Closed => Ok(1.0 / (alpha * r)),
        ArrowPrattMode::FiniteDiff => {
            let h = ARROW_PRATT_STEP;
            if r < 10.0 * h {
                return Err(Error::DomainError(format!(
                    "guess probability {r} too close to 0 for step {h}"
                )));
            }
            let g = |t: f64| ln_q(t, 1.0 / alpha);
            let (lo, mid, hi) = (g(r - h), g(r), g(r + h));
            let d1 = (hi - lo) / (2.0 * h);
            let d2 = (hi - 2.0 * mid + lo) / (h * h);
            Ok(-d2 / d1)
        }
    }
}
