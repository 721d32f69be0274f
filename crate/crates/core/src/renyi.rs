//! Rényi entropy and divergence, conditional Rényi entropies, and the
//! α-mutual-information family.
//!
//! Every quantity is available three ways, selected by [`Method`]:
//!
//! | variant            | closed form                               | optimize / oracle                    |
//! |--------------------|-------------------------------------------|--------------------------------------|
//! | Sibson MI          | `α/(α-1) ln Σ_y (Σ_x p W^α)^{1/α}`         | min over `q_Y` of the divergence sum |
//! | Arimoto MI         | `H_α(X) - H_α^A(X|Y)`                      | via the conditional entropy          |
//! | Augustin–Csiszár   | [`augustin_fixed_point`]                  | min over `q_Y` of `E_p D_α`          |
//! | Hayashi MI         | `H_α(X) - H_α^H(X|Y)`                      | via the conditional entropy          |
//! | Lapidoth–Pfister   | [`lp_alternating`]                        | min over `q_X ⊗ q_Y`                 |
//!
//! Conditional entropies under `optimize`/`oracle` minimize the decision-rule
//! forms directly: `min_r k ln Σ_{x,y} c(x,y) r(x|y)^{1-1/α}` (Arimoto with
//! `c = pW`, Sibson with the `1/α`-tilted prior), its per-input-logarithm
//! counterpart for Augustin–Csiszár, and the `α/(2α-1)`-power counterpart for
//! Lapidoth–Pfister. Hayashi uses the expected power score.
//!
//! Orders within `1e-8` of 1 take the Shannon branch in [`renyi_entropy`] and
//! [`renyi_divergence`]. The MI and conditional-entropy functions reject
//! `α = 1` for the non-Shannon variants; use [`MiVariant::Shannon`] instead.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid_order, Error, Result};
use crate::leakage::{power_score, power_score_gradient};
use crate::optimize::{
    augustin_fixed_point, eg_optimize, eg_optimize_from, grid_lipschitz, grid_search,
    lp_alternating, lp_coordinate_step, product_divergence, Direction, Objective, OptimizerConfig,
    WithGradient, ORACLE_LIMIT, ORACLE_MAX_ALPHABET,
};
use crate::qcalc::is_unit;
use crate::simplex::{compose_joint, power_sum, tilt_slice, Channel, JointDist, Pmf};

/// The α-mutual-information measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MiVariant {
    Shannon,
    Sibson,
    Arimoto,
    AugustinCsiszar,
    Hayashi,
    LapidothPfister,
}

impl MiVariant {
    pub const ALL: [MiVariant; 6] = [
        MiVariant::Shannon,
        MiVariant::Sibson,
        MiVariant::Arimoto,
        MiVariant::AugustinCsiszar,
        MiVariant::Hayashi,
        MiVariant::LapidothPfister,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MiVariant::Shannon => "shannon",
            MiVariant::Sibson => "sibson",
            MiVariant::Arimoto => "arimoto",
            MiVariant::AugustinCsiszar => "augustin_csiszar",
            MiVariant::Hayashi => "hayashi",
            MiVariant::LapidothPfister => "lapidoth_pfister",
        }
    }

    /// Whether `alpha` is a valid order for this variant.
    pub fn accepts(self, alpha: f64) -> bool {
        check_order(self, alpha).is_ok()
    }
}

impl fmt::Display for MiVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MiVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "shannon" => Ok(MiVariant::Shannon),
            "sibson" => Ok(MiVariant::Sibson),
            "arimoto" => Ok(MiVariant::Arimoto),
            "augustin_csiszar" | "augustin" | "csiszar" | "ac" => Ok(MiVariant::AugustinCsiszar),
            "hayashi" => Ok(MiVariant::Hayashi),
            "lapidoth_pfister" | "lapidoth" | "lp" => Ok(MiVariant::LapidothPfister),
            other => Err(Error::UnsupportedVariant(other.to_string())),
        }
    }
}

/// How a quantity is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    /// Exponentiated gradient on the defining optimization problem.
    Optimize,
    /// Exhaustive grid search; alphabets of at most 4 symbols.
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed",
            Method::Optimize => "optimize",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "closed" | "closed_form" | "closed-form" => Ok(Method::ClosedForm),
            "optimize" | "opt" => Ok(Method::Optimize),
            "oracle" | "grid" => Ok(Method::Oracle),
            other => Err(Error::InvalidConfig(match other {
                "" => "empty method name",
                _ => "unknown method (expected closed, optimize or oracle)",
            })),
        }
    }
}

/// A computed value with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub method: Method,
    /// Optimizer gap for `optimize`, grid bound for `oracle`, 0 otherwise.
    pub residual: f64,
}

impl Estimate {
    fn exact(value: f64) -> Self {
        Self {
            value,
            method: Method::ClosedForm,
            residual: 0.0,
        }
    }
}

/// Shannon entropy, conditional entropy and mutual information, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShannonMeasures {
    pub h: f64,
    pub h_cond: f64,
    pub i: f64,
}

pub(crate) fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

pub(crate) fn renyi_entropy_raw(p: &[f64], alpha: f64) -> f64 {
    if is_unit(alpha) {
        entropy(p)
    } else {
        power_sum(p, alpha).ln() / (1.0 - alpha)
    }
}

fn check_dims(p: &Pmf, w: &Channel) -> Result<()> {
    if p.len() != w.nx() {
        return Err(Error::DimensionMismatch {
            what: "channel input alphabet",
            expected: w.nx(),
            found: p.len(),
        });
    }
    Ok(())
}

fn check_positive(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid_order(alpha, "order must be positive and finite"))
    }
}

pub(crate) fn check_order(variant: MiVariant, alpha: f64) -> Result<()> {
    if variant == MiVariant::Shannon {
        return Ok(());
    }
    check_positive(alpha)?;
    if is_unit(alpha) {
        return Err(invalid_order(alpha, "order 1 is the Shannon case"));
    }
    if variant == MiVariant::LapidothPfister && alpha <= 0.5 {
        return Err(invalid_order(
            alpha,
            "Lapidoth–Pfister order must exceed 1/2",
        ));
    }
    Ok(())
}

/// ```
/// use alphaleak::{shannon_measures, Channel, Pmf};
///
/// let m = shannon_measures(&Pmf::uniform(2), &Channel::identity(2)).unwrap();
/// assert!((m.i - 2f64.ln()).abs() < 1e-15);
/// ```
pub fn shannon_measures(p: &Pmf, w: &Channel) -> Result<ShannonMeasures> {
    check_dims(p, w)?;
    let joint = compose_joint(p, w)?;
    let h = entropy(p.probs());
    let mut h_cond = 0.0;
    for (row, _) in joint.matrix().iter().zip(p.probs()) {
        for (&pxy, &py) in row.iter().zip(joint.p_y()) {
            if pxy > 0.0 {
                h_cond -= pxy * (pxy / py).ln();
            }
        }
    }
    let i = clamp_mi(h - h_cond, 1e-12, "Shannon mutual information")?;
    Ok(ShannonMeasures { h, h_cond, i })
}

/// `H_α(p) = ln(Σ p^α) / (1-α)`, Shannon entropy at `α = 1`.
///
/// ```
/// use alphaleak::{make_pmf, renyi_entropy};
///
/// let p = make_pmf(&[0.8, 0.2], false).unwrap();
/// assert!((renyi_entropy(&p, 2.0).unwrap() + 0.68f64.ln()).abs() < 1e-15);
/// ```
pub fn renyi_entropy(p: &Pmf, alpha: f64) -> Result<f64> {
    check_positive(alpha)?;
    Ok(renyi_entropy_raw(p.probs(), alpha))
}

/// Evaluated as `Σ_i [p^α q^{1-α} - q - α(p - q)]`, whose terms share the
/// sign of `α - 1` (and `Σ [p ln(p/q) - p + q]` at `α = 1`, whose terms are
/// nonnegative), so that nearby arguments do not cancel to a negative value.
pub(crate) fn renyi_divergence_raw(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    let unit = is_unit(alpha);
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 && b == 0.0 {
            if unit || alpha > 1.0 {
                return f64::INFINITY;
            }
            s -= alpha * a;
        } else if b > 0.0 {
            let d = (a - b) / b;
            s += if unit {
                if a > 0.0 {
                    a * d.ln_1p() - (a - b)
                } else {
                    b
                }
            } else {
                b * ((alpha * d.ln_1p()).exp_m1() - alpha * d)
            };
        }
    }
    if unit {
        return s.max(0.0);
    }
    if s <= -1.0 {
        return f64::INFINITY;
    }
    (s.ln_1p() / (alpha - 1.0)).max(0.0)
}

/// `D_α(p‖q) = ln(Σ p^α q^{1-α}) / (α-1)`, Kullback–Leibler at `α = 1`.
/// Infinite when `q` misses part of the support of `p` (for `α ≥ 1`) or the
/// supports are disjoint.
pub fn renyi_divergence(p: &Pmf, q: &Pmf, alpha: f64) -> Result<f64> {
    check_positive(alpha)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            what: "divergence arguments",
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(renyi_divergence_raw(p.probs(), q.probs(), alpha))
}

/// Clamps small negative rounding to zero, rejecting larger negatives.
fn clamp_mi(value: f64, threshold: f64, what: &'static str) -> Result<f64> {
    if value.is_nan() {
        return Err(Error::NumericalInconsistency { what, value });
    }
    if value >= 0.0 {
        Ok(value)
    } else if value >= -threshold {
        Ok(0.0)
    } else {
        Err(Error::NumericalInconsistency { what, value })
    }
}

fn oracle_guard(nx: usize, ny: usize) -> Result<()> {
    if nx > ORACLE_MAX_ALPHABET || ny > ORACLE_MAX_ALPHABET {
        return Err(Error::OracleTooLarge {
            count: (nx as u128)
                .saturating_mul(ny as u128)
                .saturating_mul(ORACLE_LIMIT),
            limit: ORACLE_LIMIT,
        });
    }
    Ok(())
}

/// `(Σ_x c_x^α)^{1/α}` per output, summed: the inner optimum of the
/// decision-rule form shared by the Arimoto and Sibson conditional entropies.
fn norm_sum(joint_like: &[Vec<f64>], alpha: f64) -> f64 {
    let ny = joint_like[0].len();
    (0..ny)
        .map(|y| {
            joint_like
                .iter()
                .map(|row| row[y])
                .filter(|&v| v > 0.0)
                .map(|v| v.powf(alpha))
                .sum::<f64>()
                .powf(1.0 / alpha)
        })
        .sum()
}

fn weighted(p: &[f64], w: &Channel) -> Vec<Vec<f64>> {
    w.rows()
        .iter()
        .zip(p)
        .map(|(row, &px)| row.iter().map(|&v| px * v).collect())
        .collect()
}

fn arimoto_cond_closed(p: &[f64], w: &Channel, alpha: f64) -> f64 {
    alpha / (1.0 - alpha) * norm_sum(&weighted(p, w), alpha).ln()
}

fn hayashi_cond_closed(joint: &JointDist, alpha: f64) -> f64 {
    let mut s = 0.0;
    for row in joint.matrix() {
        for (&pxy, &py) in row.iter().zip(joint.p_y()) {
            if pxy > 0.0 {
                s += pxy.powf(alpha) * py.powf(1.0 - alpha);
            }
        }
    }
    s.ln() / (1.0 - alpha)
}

fn sibson_mi_closed(p: &[f64], w: &Channel, alpha: f64) -> f64 {
    let s: f64 = (0..w.ny())
        .map(|y| {
            w.rows()
                .iter()
                .zip(p)
                .filter(|(row, &px)| px > 0.0 && row[y] > 0.0)
                .map(|(row, &px)| px * row[y].powf(alpha))
                .sum::<f64>()
                .powf(1.0 / alpha)
        })
        .sum();
    alpha / (alpha - 1.0) * s.ln()
}

/// The output distribution minimizing `D_α(p ⊗ W ‖ p ⊗ q)`: normalized
/// `(Σ_x p(x) W(y|x)^α)^{1/α}`.
pub fn sibson_output_distribution(p: &Pmf, w: &Channel, alpha: f64) -> Result<Pmf> {
    check_order(MiVariant::Sibson, alpha)?;
    check_dims(p, w)?;
    let q: Vec<f64> = (0..w.ny())
        .map(|y| {
            (0..w.nx())
                .filter(|&x| p.get(x) > 0.0 && w.w(x, y) > 0.0)
                .map(|x| p.get(x) * w.w(x, y).powf(alpha))
                .sum::<f64>()
                .powf(1.0 / alpha)
        })
        .collect();
    Ok(Pmf::from_normalized(w.y_labels().to_vec(), q))
}

// ---------------------------------------------------------------------------
// Decision-rule objectives. Points are indexed `r[y][x]`.

/// `k ln Σ_{x,y} c(x,y) r(x|y)^e` with `e = 1 - 1/α`, `k = α/(1-α)`.
struct PowerRule {
    c: Vec<Vec<f64>>,
    e: f64,
    k: f64,
}

impl PowerRule {
    fn new(c: Vec<Vec<f64>>, alpha: f64) -> Self {
        Self {
            c,
            e: 1.0 - 1.0 / alpha,
            k: alpha / (1.0 - alpha),
        }
    }

    fn slice(&self, y: usize, r: &[f64]) -> f64 {
        self.c
            .iter()
            .zip(r)
            .filter(|(row, _)| row[y] > 0.0)
            .map(|(row, &rx)| row[y] * rx.powf(self.e))
            .sum()
    }

    fn sum(&self, r: &[Vec<f64>]) -> f64 {
        r.iter().enumerate().map(|(y, ry)| self.slice(y, ry)).sum()
    }

    fn value(&self, r: &[Vec<f64>]) -> f64 {
        self.k * self.sum(r).ln()
    }
}

/// `k Σ_x p(x) ln B_x(r)` (Augustin–Csiszár) or
/// `k' ln Σ_x p̃(x) B_x(r)^γ` (Lapidoth–Pfister), with
/// `B_x = Σ_y W(y|x) r(x|y)^{1-1/α}`.
struct CoupledRule<'a> {
    p: Vec<f64>,
    w: &'a Channel,
    e: f64,
    k: f64,
    /// `None` for the Augustin–Csiszár form, `Some(γ)` for Lapidoth–Pfister.
    gamma: Option<f64>,
}

impl CoupledRule<'_> {
    fn inner(&self, x: usize, r: &[Vec<f64>]) -> f64 {
        self.w
            .row(x)
            .iter()
            .zip(r)
            .filter(|(&wy, _)| wy > 0.0)
            .map(|(&wy, ry)| wy * ry[x].powf(self.e))
            .sum()
    }

    fn active(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.p
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, px)| px > 0.0)
    }
}

impl Objective for CoupledRule<'_> {
    fn value(&self, r: &[Vec<f64>]) -> f64 {
        match self.gamma {
            None => {
                self.k
                    * self
                        .active()
                        .map(|(x, px)| px * self.inner(x, r).ln())
                        .sum::<f64>()
            }
            Some(g) => {
                self.k
                    * self
                        .active()
                        .map(|(x, px)| px * self.inner(x, r).powf(g))
                        .sum::<f64>()
                        .ln()
            }
        }
    }

    fn gradient(&self, r: &[Vec<f64>], grad: &mut [Vec<f64>]) {
        grad.iter_mut()
            .for_each(|b| b.iter_mut().for_each(|v| *v = 0.0));
        let inner: Vec<f64> = (0..self.p.len()).map(|x| self.inner(x, r)).collect();
        let total = self.gamma.map(|g| {
            self.active()
                .map(|(x, px)| px * inner[x].powf(g))
                .sum::<f64>()
        });
        for (x, px) in self.active() {
            let outer = match (self.gamma, total) {
                (Some(g), Some(t)) => self.k * px * g * inner[x].powf(g - 1.0) / t,
                _ => self.k * px / inner[x],
            };
            for (y, &wy) in self.w.row(x).iter().enumerate() {
                if wy > 0.0 {
                    grad[y][x] += outer * wy * self.e * r[y][x].powf(self.e - 1.0);
                }
            }
        }
    }
}

/// `Σ_{x,y} p(x)W(y|x) f_α(x, r(·|y))` with the power score `f_α`.
struct PowerScoreRule {
    c: Vec<Vec<f64>>,
    alpha: f64,
}

impl PowerScoreRule {
    fn slice(&self, y: usize, r: &[f64]) -> f64 {
        self.c
            .iter()
            .enumerate()
            .filter(|(_, row)| row[y] > 0.0)
            .map(|(x, row)| row[y] * power_score(x, r, self.alpha))
            .sum()
    }

    fn value(&self, r: &[Vec<f64>]) -> f64 {
        r.iter().enumerate().map(|(y, ry)| self.slice(y, ry)).sum()
    }
}

fn rule_shape(nx: usize, ny: usize) -> Vec<usize> {
    vec![nx; ny]
}

/// Optimizes a separable rule objective one output slice at a time on the
/// grid, then reports the bound of the assembled rule for `total`.
fn separable_oracle<S, T>(
    nx: usize,
    ny: usize,
    slice: S,
    slice_direction: Direction,
    total: T,
    resolution: f64,
) -> Result<(f64, f64)>
where
    S: Fn(usize, &[f64]) -> f64,
    T: Fn(&[Vec<f64>]) -> f64,
{
    let mut rule = Vec::with_capacity(ny);
    for y in 0..ny {
        let out = grid_search(
            |pt: &[Vec<f64>]| slice(y, &pt[0]),
            &[nx],
            slice_direction,
            resolution,
        )?;
        rule.push(out.point.into_iter().next().expect("one block"));
    }
    let value = total(&rule);
    // Every separable total is a conditional entropy, which is minimized.
    let lip = grid_lipschitz(&total, &rule, value, resolution, Direction::Minimize);
    Ok((value, lip * resolution * (nx * ny) as f64))
}

/// The tilted prior `p̃ = tilt(p, beta)` times the channel.
fn tilted_weights(p: &Pmf, w: &Channel, beta: f64) -> Vec<Vec<f64>> {
    weighted(&tilt_slice(p.probs(), beta), w)
}

/// `min_r k ln Σ c r^e` (Arimoto, Sibson forms).
fn power_rule_estimate(
    c: Vec<Vec<f64>>,
    alpha: f64,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<Estimate> {
    let nx = c.len();
    let ny = c[0].len();
    let objective = PowerRule::new(c, alpha);
    match method {
        Method::Oracle => {
            oracle_guard(nx, ny)?;
            // k ln is increasing for α < 1, so each slice is minimized; for
            // α > 1 each slice is maximized.
            let slice_dir = if alpha < 1.0 {
                Direction::Minimize
            } else {
                Direction::Maximize
            };
            let (value, bound) = separable_oracle(
                nx,
                ny,
                |y, r| objective.slice(y, r),
                slice_dir,
                |r| objective.value(r),
                cfg.grid_resolution,
            )?;
            Ok(Estimate {
                value,
                method,
                residual: bound,
            })
        }
        _ => {
            let slice_dir = if alpha < 1.0 {
                Direction::Minimize
            } else {
                Direction::Maximize
            };
            let (e, c) = (objective.e, &objective.c);
            let (rule, residual) = separable_eg(
                c,
                |y, r| objective.slice(y, r),
                |y, r, g| {
                    for ((gx, row), &rx) in g.iter_mut().zip(c).zip(r) {
                        *gx = if row[y] > 0.0 {
                            row[y] * e * rx.powf(e - 1.0)
                        } else {
                            0.0
                        };
                    }
                },
                slice_dir,
                cfg,
            )?;
            Ok(Estimate {
                value: objective.value(&rule),
                method: Method::Optimize,
                residual,
            })
        }
    }
}

/// Exponentiated gradient on each output slice of a separable rule
/// objective, with slice weights rescaled to unit mass. Returns the
/// assembled rule and the largest slice residual.
fn separable_eg<V, G>(
    c: &[Vec<f64>],
    slice: V,
    slice_gradient: G,
    direction: Direction,
    cfg: &OptimizerConfig,
) -> Result<(Vec<Vec<f64>>, f64)>
where
    V: Fn(usize, &[f64]) -> f64,
    G: Fn(usize, &[f64], &mut [f64]),
{
    let nx = c.len();
    let ny = c[0].len();
    let mut rule = Vec::with_capacity(ny);
    let mut residual: f64 = 0.0;
    for y in 0..ny {
        let mass: f64 = c.iter().map(|row| row[y]).sum();
        if mass <= 0.0 {
            rule.push(vec![1.0 / nx as f64; nx]);
            continue;
        }
        let objective = WithGradient(
            |pt: &[Vec<f64>]| slice(y, &pt[0]) / mass,
            |pt: &[Vec<f64>], g: &mut [Vec<f64>]| {
                slice_gradient(y, &pt[0], &mut g[0]);
                g[0].iter_mut().for_each(|v| *v /= mass);
            },
        );
        let out = eg_optimize(&objective, &[nx], direction, cfg)?;
        residual = residual.max(out.residual);
        rule.push(out.point.into_iter().next().expect("one block"));
    }
    Ok((rule, residual))
}

fn coupled_rule_estimate(
    objective: &CoupledRule<'_>,
    init: Vec<Vec<f64>>,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<Estimate> {
    let nx = objective.w.nx();
    let ny = objective.w.ny();
    match method {
        Method::Oracle => {
            oracle_guard(nx, ny)?;
            let out = grid_search(
                |r: &[Vec<f64>]| objective.value(r),
                &rule_shape(nx, ny),
                Direction::Minimize,
                cfg.grid_resolution,
            )?;
            Ok(Estimate {
                value: out.value,
                method,
                residual: out.bound,
            })
        }
        _ => {
            let out = eg_optimize_from(objective, init, Direction::Minimize, cfg)?;
            Ok(Estimate {
                value: out.value,
                method: Method::Optimize,
                residual: out.residual,
            })
        }
    }
}

/// Posterior family `p(·|y)`, uniform where `p_Y(y) = 0`.
pub(crate) fn posterior_family(joint: &JointDist) -> Vec<Vec<f64>> {
    (0..joint.ny())
        .map(|y| match joint.posterior(y) {
            Some(post) => post.to_vec(),
            None => vec![1.0 / joint.nx() as f64; joint.nx()],
        })
        .collect()
}

/// Conditional Rényi entropy with method metadata. See
/// [`cond_renyi_entropy`].
pub fn cond_renyi_entropy_estimate(
    variant: MiVariant,
    p: &Pmf,
    w: &Channel,
    alpha: f64,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<Estimate> {
    if variant == MiVariant::Shannon {
        return Err(Error::UnsupportedVariant(
            "the Shannon conditional entropy is available from shannon_measures".into(),
        ));
    }
    check_order(variant, alpha)?;
    check_dims(p, w)?;
    cfg.validate()?;
    let joint = compose_joint(p, w)?;
    match (variant, method) {
        (MiVariant::Arimoto, Method::ClosedForm) => {
            Ok(Estimate::exact(arimoto_cond_closed(p.probs(), w, alpha)))
        }
        (MiVariant::Arimoto, _) => power_rule_estimate(weighted(p.probs(), w), alpha, method, cfg),
        (MiVariant::Sibson, Method::ClosedForm) => {
            let tilted = tilt_slice(p.probs(), 1.0 / alpha);
            Ok(Estimate::exact(arimoto_cond_closed(&tilted, w, alpha)))
        }
        (MiVariant::Sibson, _) => {
            power_rule_estimate(tilted_weights(p, w, 1.0 / alpha), alpha, method, cfg)
        }
        (MiVariant::Hayashi, Method::ClosedForm) => {
            Ok(Estimate::exact(hayashi_cond_closed(&joint, alpha)))
        }
        (MiVariant::Hayashi, _) => hayashi_cond_variational(p, w, alpha, method, cfg),
        (MiVariant::AugustinCsiszar, Method::ClosedForm) => {
            let mi = augustin_fixed_point(p, w, alpha, cfg)?;
            Ok(Estimate::exact(entropy(p.probs()) - mi.value))
        }
        (MiVariant::AugustinCsiszar, _) => {
            let objective = CoupledRule {
                p: p.probs().to_vec(),
                w,
                e: 1.0 - 1.0 / alpha,
                k: alpha / (1.0 - alpha),
                gamma: None,
            };
            coupled_rule_estimate(&objective, posterior_family(&joint), method, cfg)
        }
        (MiVariant::LapidothPfister, Method::ClosedForm) => {
            let mi = lp_alternating(&joint, alpha, cfg)?;
            let order = alpha / (2.0 * alpha - 1.0);
            Ok(Estimate::exact(
                renyi_entropy_raw(p.probs(), order) - mi.value,
            ))
        }
        (MiVariant::LapidothPfister, _) => {
            let gamma = alpha / (2.0 * alpha - 1.0);
            let objective = CoupledRule {
                p: tilt_slice(p.probs(), gamma),
                w,
                e: 1.0 - 1.0 / alpha,
                k: (2.0 * alpha - 1.0) / (1.0 - alpha),
                gamma: Some(gamma),
            };
            coupled_rule_estimate(&objective, posterior_family(&joint), method, cfg)
        }
        (MiVariant::Shannon, _) => unreachable!("rejected above"),
    }
}

/// `H_α^H = ln(opt_r Σ p W f_α) / (1-α)`: the expected power score is
/// maximized for `α > 1` and minimized for `α < 1`, with optimum `r = p(·|y)`.
fn hayashi_cond_variational(
    p: &Pmf,
    w: &Channel,
    alpha: f64,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<Estimate> {
    let (nx, ny) = (w.nx(), w.ny());
    let objective = PowerScoreRule {
        c: weighted(p.probs(), w),
        alpha,
    };
    let direction = if alpha > 1.0 {
        Direction::Maximize
    } else {
        Direction::Minimize
    };
    let finish = |s: f64| s.ln() / (1.0 - alpha);
    match method {
        Method::Oracle => {
            oracle_guard(nx, ny)?;
            let (value, bound) = separable_oracle(
                nx,
                ny,
                |y, r| objective.slice(y, r),
                direction,
                |r| finish(objective.value(r)),
                cfg.grid_resolution,
            )?;
            Ok(Estimate {
                value,
                method,
                residual: bound,
            })
        }
        _ => {
            let c = &objective.c;
            let (rule, residual) = separable_eg(
                c,
                |y, r| objective.slice(y, r),
                |y, r, g| {
                    g.iter_mut().for_each(|v| *v = 0.0);
                    for (x, row) in c.iter().enumerate() {
                        if row[y] > 0.0 {
                            power_score_gradient(x, r, alpha, row[y], g);
                        }
                    }
                },
                direction,
                cfg,
            )?;
            Ok(Estimate {
                value: finish(objective.value(&rule)),
                method: Method::Optimize,
                residual,
            })
        }
    }
}

/// Conditional Rényi entropy of order `alpha` for the Arimoto, Hayashi,
/// Sibson, Augustin–Csiszár and Lapidoth–Pfister variants.
///
/// ```
/// use alphaleak::{cond_renyi_entropy, Channel, Method, MiVariant, OptimizerConfig, Pmf};
///
/// let w = Channel::bsc(0.1).unwrap();
/// let cfg = OptimizerConfig::default();
/// let h = cond_renyi_entropy(MiVariant::Arimoto, &Pmf::uniform(2), &w, 2.0, Method::ClosedForm, &cfg).unwrap();
/// assert!((h - 0.19845).abs() < 1e-5);
/// ```
pub fn cond_renyi_entropy(
    variant: MiVariant,
    p: &Pmf,
    w: &Channel,
    alpha: f64,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    cond_renyi_entropy_estimate(variant, p, w, alpha, method, cfg).map(|e| e.value)
}

/// Negative MI values down to this magnitude are treated as rounding.
fn clamp_threshold(method: Method, residual: f64) -> f64 {
    match method {
        Method::ClosedForm => 1e-12,
        Method::Optimize => 1e-6,
        Method::Oracle => residual + 1e-12,
    }
}

/// `Σ_x p(x) D_α(W(·|x) ‖ q)` over a full output alphabet.
struct AugustinQ<'a> {
    p: &'a [f64],
    w: &'a Channel,
    alpha: f64,
}

impl AugustinQ<'_> {
    fn mass(&self, x: usize, q: &[f64]) -> f64 {
        self.w
            .row(x)
            .iter()
            .zip(q)
            .filter(|(&wy, _)| wy > 0.0)
            .map(|(&wy, &qy)| wy.powf(self.alpha) * qy.powf(1.0 - self.alpha))
            .sum()
    }
}

impl Objective for AugustinQ<'_> {
    fn value(&self, q: &[Vec<f64>]) -> f64 {
        (0..self.p.len())
            .filter(|&x| self.p[x] > 0.0)
            .map(|x| self.p[x] * self.mass(x, &q[0]).ln() / (self.alpha - 1.0))
            .sum()
    }

    fn gradient(&self, q: &[Vec<f64>], grad: &mut [Vec<f64>]) {
        let g = &mut grad[0];
        g.iter_mut().for_each(|v| *v = 0.0);
        for x in (0..self.p.len()).filter(|&x| self.p[x] > 0.0) {
            let z = self.mass(x, &q[0]);
            for (y, &wy) in self.w.row(x).iter().enumerate() {
                if wy > 0.0 {
                    g[y] -= self.p[x] * wy.powf(self.alpha) * q[0][y].powf(-self.alpha) / z;
                }
            }
        }
    }
}

/// `D_α(p ⊗ W ‖ p ⊗ q)` as a function of `q`.
struct SibsonQ {
    /// `p(x) W(y|x)^α`, summed over `x`.
    a: Vec<f64>,
    alpha: f64,
}

impl Objective for SibsonQ {
    fn value(&self, q: &[Vec<f64>]) -> f64 {
        let s: f64 = self
            .a
            .iter()
            .zip(&q[0])
            .filter(|(&a, _)| a > 0.0)
            .map(|(&a, &qy)| a * qy.powf(1.0 - self.alpha))
            .sum();
        s.ln() / (self.alpha - 1.0)
    }

    fn gradient(&self, q: &[Vec<f64>], grad: &mut [Vec<f64>]) {
        let s: f64 = self
            .a
            .iter()
            .zip(&q[0])
            .filter(|(&a, _)| a > 0.0)
            .map(|(&a, &qy)| a * qy.powf(1.0 - self.alpha))
            .sum();
        for ((g, &a), &qy) in grad[0].iter_mut().zip(&self.a).zip(&q[0]) {
            *g = if a > 0.0 {
                -a * qy.powf(-self.alpha) / s
            } else {
                0.0
            };
        }
    }
}

/// `D_α(P ‖ q_X ⊗ q_Y)` on the product of two simplices.
struct ProductQ<'a> {
    matrix: &'a [Vec<f64>],
    alpha: f64,
}

impl ProductQ<'_> {
    fn sum(&self, qx: &[f64], qy: &[f64]) -> f64 {
        let mut s = 0.0;
        for (row, &a) in self.matrix.iter().zip(qx) {
            for (&pxy, &b) in row.iter().zip(qy) {
                if pxy > 0.0 {
                    s += pxy.powf(self.alpha) * (a * b).powf(1.0 - self.alpha);
                }
            }
        }
        s
    }
}

impl Objective for ProductQ<'_> {
    fn value(&self, q: &[Vec<f64>]) -> f64 {
        product_divergence(self.matrix, &q[0], &q[1], self.alpha)
    }

    fn gradient(&self, q: &[Vec<f64>], grad: &mut [Vec<f64>]) {
        let s = self.sum(&q[0], &q[1]);
        grad[0].iter_mut().for_each(|v| *v = 0.0);
        grad[1].iter_mut().for_each(|v| *v = 0.0);
        for (x, row) in self.matrix.iter().enumerate() {
            for (y, &pxy) in row.iter().enumerate() {
                if pxy > 0.0 {
                    let t = pxy.powf(self.alpha) * (q[0][x] * q[1][y]).powf(1.0 - self.alpha) / s;
                    grad[0][x] -= t / q[0][x];
                    grad[1][y] -= t / q[1][y];
                }
            }
        }
    }
}

fn single_block_oracle<O: Objective>(
    objective: &O,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<Estimate> {
    let out = grid_search(
        |q: &[Vec<f64>]| objective.value(q),
        &[n],
        Direction::Minimize,
        cfg.grid_resolution,
    )?;
    Ok(Estimate {
        value: out.value,
        method: Method::Oracle,
        residual: out.bound,
    })
}

fn lp_oracle(joint: &JointDist, alpha: f64, cfg: &OptimizerConfig) -> Result<Estimate> {
    let m = joint.matrix();
    let objective = ProductQ { matrix: m, alpha };
    match grid_search(
        |q: &[Vec<f64>]| objective.value(q),
        &[joint.nx(), joint.ny()],
        Direction::Minimize,
        cfg.grid_resolution,
    ) {
        Ok(out) => Ok(Estimate {
            value: out.value,
            method: Method::Oracle,
            residual: out.bound,
        }),
        Err(Error::OracleTooLarge { .. }) => {
            // Grid over q_X only; the inner minimum over q_Y is exact.
            let inner = |qx: &[f64]| {
                let qy = lp_coordinate_step(m, qx, alpha);
                product_divergence(m, qx, &qy, alpha)
            };
            let out = grid_search(
                |q: &[Vec<f64>]| inner(&q[0]),
                &[joint.nx()],
                Direction::Minimize,
                cfg.grid_resolution,
            )?;
            Ok(Estimate {
                value: out.value,
                method: Method::Oracle,
                residual: out.bound,
            })
        }
        Err(e) => Err(e),
    }
}

/// α-mutual information with method metadata. See [`alpha_mi`].
pub fn alpha_mi_estimate(
    variant: MiVariant,
    p: &Pmf,
    w: &Channel,
    alpha: f64,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<Estimate> {
    check_order(variant, alpha)?;
    check_dims(p, w)?;
    cfg.validate()?;
    let (nx, ny) = (w.nx(), w.ny());
    if method == Method::Oracle {
        oracle_guard(nx, ny)?;
    }
    let est = match (variant, method) {
        (MiVariant::Shannon, _) => Estimate::exact(shannon_measures(p, w)?.i),
        (MiVariant::Sibson, Method::ClosedForm) => {
            Estimate::exact(sibson_mi_closed(p.probs(), w, alpha))
        }
        (MiVariant::Sibson, _) => {
            let mut a = vec![0.0; ny];
            for (row, &px) in w.rows().iter().zip(p.probs()) {
                for (ay, &wy) in a.iter_mut().zip(row) {
                    if px > 0.0 && wy > 0.0 {
                        *ay += px * wy.powf(alpha);
                    }
                }
            }
            let objective = SibsonQ { a, alpha };
            if method == Method::Oracle {
                single_block_oracle(&objective, ny, cfg)?
            } else {
                let init = vec![compose_joint(p, w)?.p_y().to_vec()];
                let out = eg_optimize_from(&objective, init, Direction::Minimize, cfg)?;
                Estimate {
                    value: out.value,
                    method,
                    residual: out.residual,
                }
            }
        }
        (MiVariant::Arimoto, _) | (MiVariant::Hayashi, _) => {
            let cond = cond_renyi_entropy_estimate(variant, p, w, alpha, method, cfg)?;
            Estimate {
                value: renyi_entropy_raw(p.probs(), alpha) - cond.value,
                ..cond
            }
        }
        (MiVariant::AugustinCsiszar, Method::ClosedForm) => {
            Estimate::exact(augustin_fixed_point(p, w, alpha, cfg)?.value)
        }
        (MiVariant::AugustinCsiszar, _) => {
            let objective = AugustinQ {
                p: p.probs(),
                w,
                alpha,
            };
            if method == Method::Oracle {
                single_block_oracle(&objective, ny, cfg)?
            } else {
                let init = vec![compose_joint(p, w)?.p_y().to_vec()];
                let out = eg_optimize_from(&objective, init, Direction::Minimize, cfg)?;
                Estimate {
                    value: out.value,
                    method,
                    residual: out.residual,
                }
            }
        }
        (MiVariant::LapidothPfister, Method::ClosedForm) => {
            Estimate::exact(lp_alternating(&compose_joint(p, w)?, alpha, cfg)?.value)
        }
        (MiVariant::LapidothPfister, _) => {
            let joint = compose_joint(p, w)?;
            if method == Method::Oracle {
                lp_oracle(&joint, alpha, cfg)?
            } else {
                let objective = ProductQ {
                    matrix: joint.matrix(),
                    alpha,
                };
                let init = vec![joint.p_x().to_vec(), joint.p_y().to_vec()];
                let out = eg_optimize_from(&objective, init, Direction::Minimize, cfg)?;
                Estimate {
                    value: out.value,
                    method,
                    residual: out.residual,
                }
            }
        }
    };
    let value = clamp_mi(
        est.value,
        clamp_threshold(est.method, est.residual),
        "α-mutual information",
    )?;
    Ok(Estimate { value, ..est })
}

/// α-mutual information of the given variant, in nats.
///
/// ```
/// use alphaleak::{alpha_mi, Channel, Method, MiVariant, OptimizerConfig, Pmf};
///
/// let (p, w) = (Pmf::uniform(2), Channel::bsc(0.1).unwrap());
/// let cfg = OptimizerConfig::default();
/// let s = alpha_mi(MiVariant::Sibson, &p, &w, 2.0, Method::ClosedForm, &cfg).unwrap();
/// let a = alpha_mi(MiVariant::Arimoto, &p, &w, 2.0, Method::ClosedForm, &cfg).unwrap();
/// assert!((s - 0.49470).abs() < 1e-5 && (a - s).abs() < 1e-12);
/// ```
pub fn alpha_mi(
    variant: MiVariant,
    p: &Pmf,
    w: &Channel,
    alpha: f64,
    method: Method,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    alpha_mi_estimate(variant, p, w, alpha, method, cfg).map(|e| e.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_pmf;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    #[test]
    fn entropy_examples() {
        let u = Pmf::uniform(5);
        for a in [0.3, 1.0, 2.0, 7.0] {
            assert!((renyi_entropy(&u, a).unwrap() - 5f64.ln()).abs() < 1e-12);
        }
        let p = make_pmf(&[0.8, 0.2], false).unwrap();
        assert!((renyi_entropy(&p, 2.0).unwrap() - 0.385662).abs() < 1e-6);
        assert!(renyi_entropy(&p, 0.0).is_err());
        assert!(renyi_entropy(&p, -1.0).is_err());
    }

    #[test]
    fn divergence_examples() {
        let p = make_pmf(&[0.5, 0.5], false).unwrap();
        let q = make_pmf(&[0.8, 0.2], false).unwrap();
        assert!((renyi_divergence(&p, &q, 2.0).unwrap() - 1.5625f64.ln()).abs() < 1e-12);
        assert_eq!(renyi_divergence(&p, &p, 0.4).unwrap(), 0.0);
        let z = make_pmf(&[1.0, 0.0], false).unwrap();
        assert_eq!(renyi_divergence(&p, &z, 2.0).unwrap(), f64::INFINITY);
        assert!(renyi_divergence(&p, &z, 0.5).unwrap().is_finite());
    }

    #[test]
    fn bsc_reference_values() {
        let (p, w) = (Pmf::uniform(2), Channel::bsc(0.1).unwrap());
        assert!((shannon_measures(&p, &w).unwrap().i - 0.3681).abs() < 1e-4);
        let h = cond_renyi_entropy(MiVariant::Arimoto, &p, &w, 2.0, Method::ClosedForm, &cfg())
            .unwrap();
        assert!((h - 0.19845).abs() < 1e-5);
    }

    #[test]
    fn order_validation() {
        let (p, w) = (Pmf::uniform(2), Channel::bsc(0.1).unwrap());
        assert!(alpha_mi(MiVariant::Sibson, &p, &w, 1.0, Method::ClosedForm, &cfg()).is_err());
        assert!(alpha_mi(
            MiVariant::LapidothPfister,
            &p,
            &w,
            0.5,
            Method::ClosedForm,
            &cfg()
        )
        .is_err());
        assert!(alpha_mi(MiVariant::Shannon, &p, &w, 1.0, Method::ClosedForm, &cfg()).is_ok());
        assert!(matches!(
            cond_renyi_entropy(MiVariant::Shannon, &p, &w, 2.0, Method::ClosedForm, &cfg()),
            Err(Error::UnsupportedVariant(_))
        ));
    }

    #[test]
    fn oracle_rejects_large_alphabets() {
        let p = Pmf::uniform(5);
        let w = Channel::identity(5);
        assert!(matches!(
            alpha_mi(MiVariant::Sibson, &p, &w, 2.0, Method::Oracle, &cfg()),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn variant_names_round_trip() {
        for v in MiVariant::ALL {
            assert_eq!(v.name().parse::<MiVariant>().unwrap(), v);
        }
        assert!("renyi".parse::<MiVariant>().is_err());
        assert_eq!("closed".parse::<Method>().unwrap(), Method::ClosedForm);
    }

    #[test]
    fn closed_and_optimized_paths_agree_on_a_fixed_instance() {
        let p = make_pmf(&[0.5, 0.3, 0.2], false).unwrap();
        let w = Channel::new(vec![vec![0.7, 0.3], vec![0.2, 0.8], vec![0.5, 0.5]]).unwrap();
        for variant in [
            MiVariant::Sibson,
            MiVariant::Arimoto,
            MiVariant::AugustinCsiszar,
            MiVariant::Hayashi,
            MiVariant::LapidothPfister,
        ] {
            for alpha in [0.6, 2.0] {
                let c = alpha_mi(variant, &p, &w, alpha, Method::ClosedForm, &cfg()).unwrap();
                let o = alpha_mi(variant, &p, &w, alpha, Method::Optimize, &cfg()).unwrap();
                assert!((c - o).abs() < 1e-6, "{variant} α={alpha}: {c} vs {o}");
                let hc =
                    cond_renyi_entropy(variant, &p, &w, alpha, Method::ClosedForm, &cfg()).unwrap();
                let ho =
                    cond_renyi_entropy(variant, &p, &w, alpha, Method::Optimize, &cfg()).unwrap();
                assert!((hc - ho).abs() < 1e-6, "{variant} α={alpha}: {hc} vs {ho}");
            }
        }
    }
}
