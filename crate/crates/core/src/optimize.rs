//! Optimization over probability simplices.
//!
//! Four engines back the variational quantities in this crate:
//!
//! * [`simplex_grid`] / [`grid_search`]: exhaustive enumeration of a regular
//!   grid on a product of simplices. Slow, but independent of every other
//!   code path; used as a brute-force oracle.
//! * [`eg_optimize`]: exponentiated-gradient (entropic mirror) ascent or
//!   descent with a backtracking step, seeded random restarts, and a
//!   Frank–Wolfe stopping gap.
//! * [`augustin_fixed_point`]: the Augustin-mean iteration for the
//!   Augustin–Csiszár objective `min_q E_p[D_α(W(·|X) ‖ q)]`.
//! * [`lp_alternating`]: exact coordinate minimization of
//!   `D_α(p_{XY} ‖ q_X ⊗ q_Y)` over product distributions.
//!
//! The Augustin iteration is known to converge for `α ∈ (0,1)`. For `α > 1`
//! no convergence guarantee is available: the iteration is damped and, if it
//! stalls, the exponentiated-gradient engine finishes the job on the convex
//! objective. [`AugustinOutcome::engine`] records which engine produced the
//! result.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid_order, Error, Result};
use crate::qcalc::is_unit;
use crate::sampling::flat_dirichlet;
use crate::simplex::{compose_joint, Channel, JointDist, Pmf};

/// Iterates are kept at least this far from the simplex boundary.
pub const INTERIOR_FLOOR: f64 = 1e-12;

/// Largest grid an oracle may enumerate.
pub const ORACLE_LIMIT: u128 = 10_000_000;

/// Largest alphabet an oracle accepts.
pub const ORACLE_MAX_ALPHABET: usize = 4;

/// Number of iterations without halving the Augustin residual after which the
/// iteration is declared stalled.
const AUGUSTIN_PLATEAU: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Stopping threshold: Frank–Wolfe gap (relative) for exponentiated
    /// gradient, L∞ step for the Augustin iteration, value change for the
    /// alternating minimization.
    pub tolerance: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub grid_resolution: f64,
    pub step_init: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iters: 100_000,
            restarts: 10,
            seed: 0,
            grid_resolution: 5e-3,
            step_init: 0.5,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive"));
        }
        if !(self.grid_resolution > 0.0 && self.grid_resolution <= 0.5) {
            return Err(Error::InvalidConfig("grid resolution must lie in (0, 0.5]"));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1"));
        }
        if !(self.step_init > 0.0 && self.step_init.is_finite()) {
            return Err(Error::InvalidConfig("initial step must be positive"));
        }
        Ok(())
    }
}

/// Whether an objective is to be maximized or minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Maximize => 1.0,
            Direction::Minimize => -1.0,
        }
    }

    /// `a` strictly better than `b`; NaN is never better.
    pub(crate) fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Maximize => a > b,
            Direction::Minimize => a < b,
        }
    }

    pub(crate) fn flip(self) -> Self {
        match self {
            Direction::Maximize => Direction::Minimize,
            Direction::Minimize => Direction::Maximize,
        }
    }

    fn worst(self) -> f64 {
        match self {
            Direction::Maximize => f64::NEG_INFINITY,
            Direction::Minimize => f64::INFINITY,
        }
    }
}

fn steps_for(resolution: f64) -> Result<usize> {
    if !(resolution > 0.0 && resolution <= 0.5) {
        return Err(Error::InvalidConfig("grid resolution must lie in (0, 0.5]"));
    }
    let steps = (1.0 / resolution).round();
    if (steps * resolution - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidConfig("grid resolution must divide 1"));
    }
    Ok(steps as usize)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Number of points of the resolution-`1/steps` grid on the `(n-1)`-simplex.
fn grid_count(n: usize, steps: usize) -> u128 {
    binomial((steps + n - 1) as u128, (n - 1) as u128)
}

/// Integer compositions of `steps` into `n` parts in lexicographic order.
fn compositions(n: usize, steps: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(n - 1, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, steps, &mut Vec::with_capacity(n), &mut out);
    out
}

/// All points of the regular grid with spacing `resolution` on the simplex
/// over `n` symbols, in lexicographic order of their coordinates.
///
/// ```
/// use alphaleak::simplex_grid;
///
/// let pts = simplex_grid(2, 0.5).unwrap();
/// let coords: Vec<_> = pts.iter().map(|p| p.probs().to_vec()).collect();
/// assert_eq!(coords, vec![vec![0.0, 1.0], vec![0.5, 0.5], vec![1.0, 0.0]]);
/// ```
pub fn simplex_grid(n: usize, resolution: f64) -> Result<Vec<Pmf>> {
    if n < 2 {
        return Err(Error::InvalidConfig("grid needs at least two symbols"));
    }
    let steps = steps_for(resolution)?;
    let count = grid_count(n, steps);
    if count > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            count,
            limit: ORACLE_LIMIT,
        });
    }
    Ok(compositions(n, steps)
        .into_iter()
        .map(|c| Pmf::from_vec(c.into_iter().map(|k| k as f64 / steps as f64).collect()))
        .collect())
}

/// Result of an exhaustive grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub point: Vec<Vec<f64>>,
    pub value: f64,
    /// Largest change of `f` within one grid step from the optimum, per unit step.
    pub lipschitz: f64,
    /// `lipschitz · resolution · (total size of all blocks)`: the reported distance
    /// bound between the grid optimum and the continuous optimum.
    pub bound: f64,
    pub evaluations: u128,
}

/// Exhaustively optimizes `f` over the product of grids on simplices of the
/// given sizes. Ties keep the lexicographically first point.
pub fn grid_search<F>(
    f: F,
    shape: &[usize],
    direction: Direction,
    resolution: f64,
) -> Result<GridOutcome>
where
    F: Fn(&[Vec<f64>]) -> f64,
{
    if shape.is_empty() || shape.iter().any(|&n| n < 2) {
        return Err(Error::InvalidConfig(
            "grid blocks need at least two symbols",
        ));
    }
    let steps = steps_for(resolution)?;
    let count = shape
        .iter()
        .fold(1u128, |acc, &n| acc.saturating_mul(grid_count(n, steps)));
    if count > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge {
            count,
            limit: ORACLE_LIMIT,
        });
    }
    let to_point =
        |c: &Vec<usize>| -> Vec<f64> { c.iter().map(|&k| k as f64 / steps as f64).collect() };
    let grids: Vec<Vec<Vec<f64>>> = shape
        .iter()
        .map(|&n| compositions(n, steps).iter().map(to_point).collect())
        .collect();

    let mut index = vec![0usize; shape.len()];
    let mut point: Vec<Vec<f64>> = grids.iter().map(|g| g[0].clone()).collect();
    let mut best_value = direction.worst();
    let mut best_index: Option<Vec<usize>> = None;
    loop {
        let v = f(&point);
        if best_index.is_none() && !v.is_nan() || direction.better(v, best_value) {
            best_value = v;
            best_index = Some(index.clone());
        }
        // Odometer over blocks, last block fastest.
        let mut b = shape.len();
        loop {
            if b == 0 {
                break;
            }
            b -= 1;
            index[b] += 1;
            if index[b] < grids[b].len() {
                point[b].clone_from(&grids[b][index[b]]);
                break;
            }
            index[b] = 0;
            point[b].clone_from(&grids[b][0]);
            if b == 0 {
                b = usize::MAX;
                break;
            }
        }
        if b == usize::MAX {
            break;
        }
    }
    let best_index = best_index.ok_or(Error::NumericalInconsistency {
        what: "grid search found no comparable value",
        value: f64::NAN,
    })?;
    let best: Vec<Vec<f64>> = best_index
        .iter()
        .zip(&grids)
        .map(|(&i, g)| g[i].clone())
        .collect();
    let lipschitz = grid_lipschitz(&f, &best, best_value, resolution, direction);
    // Rounding error accumulates over blocks.
    let total: usize = shape.iter().sum();
    Ok(GridOutcome {
        point: best,
        value: best_value,
        lipschitz,
        bound: lipschitz * resolution * total as f64,
        evaluations: count,
    })
}

/// Largest change of `f` within one grid step, divided by the step, over
/// moves that shift mass between two coordinates of one block. Each move is
/// sampled at the full step, where any change counts, and at fractions
/// `2^-k` and `1 - 2^-k` (k = 1..8) of it, where only improvements count.
/// The latter catch a continuous optimum inside the first cell next to a
/// boundary where the objective diverges. Non-finite samples are skipped.
pub(crate) fn grid_lipschitz<F>(
    f: &F,
    point: &[Vec<f64>],
    value: f64,
    resolution: f64,
    direction: Direction,
) -> f64
where
    F: Fn(&[Vec<f64>]) -> f64,
{
    if !value.is_finite() {
        return f64::INFINITY;
    }
    let mut lip: f64 = 0.0;
    let mut probe = point.to_vec();
    for b in 0..point.len() {
        let n = point[b].len();
        for i in 0..n {
            if point[b][i] < resolution - 1e-12 {
                continue;
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                for k in 0..9 {
                    let h = 0.5f64.powi(k);
                    for step in [resolution * h, resolution * (1.0 - h)] {
                        if step == 0.0 {
                            continue;
                        }
                        probe[b][i] = point[b][i] - step;
                        probe[b][j] = point[b][j] + step;
                        let v = f(&probe);
                        // Inside a cell only improvements can hide a better
                        // optimum; full steps measure the slope either way.
                        let change = if k == 0 {
                            (v - value).abs()
                        } else {
                            direction.sign() * (v - value)
                        };
                        if change.is_finite() {
                            lip = lip.max(change / resolution);
                        }
                    }
                }
                probe[b][i] = point[b][i];
                probe[b][j] = point[b][j];
            }
        }
    }
    lip
}

/// A scalar function on a product of simplices.
///
/// Only [`Objective::value`] is required; the default gradient uses central
/// differences in log-coordinates, which needs `value` to accept slightly
/// unnormalized points.
pub trait Objective {
    fn value(&self, point: &[Vec<f64>]) -> f64;

    fn gradient(&self, point: &[Vec<f64>], grad: &mut [Vec<f64>]) {
        const H: f64 = 1e-5;
        let mut probe = point.to_vec();
        for b in 0..point.len() {
            for i in 0..point[b].len() {
                let x = point[b][i];
                probe[b][i] = x * H.exp();
                let up = self.value(&probe);
                probe[b][i] = x * (-H).exp();
                let down = self.value(&probe);
                probe[b][i] = x;
                grad[b][i] = (up - down) / (2.0 * H * x);
            }
        }
    }
}

impl<F> Objective for F
where
    F: Fn(&[Vec<f64>]) -> f64,
{
    fn value(&self, point: &[Vec<f64>]) -> f64 {
        self(point)
    }
}

/// An objective given by separate value and gradient closures.
pub struct WithGradient<F, G>(pub F, pub G);

impl<F, G> Objective for WithGradient<F, G>
where
    F: Fn(&[Vec<f64>]) -> f64,
    G: Fn(&[Vec<f64>], &mut [Vec<f64>]),
{
    fn value(&self, point: &[Vec<f64>]) -> f64 {
        (self.0)(point)
    }

    fn gradient(&self, point: &[Vec<f64>], grad: &mut [Vec<f64>]) {
        (self.1)(point, grad)
    }
}

/// Result of [`eg_optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct EgOutcome {
    pub point: Vec<Vec<f64>>,
    pub value: f64,
    /// Objective value at the starting point of the winning restart.
    pub initial_value: f64,
    /// Frank–Wolfe gap at the returned point, relative to `1 + |value|`.
    pub residual: f64,
    pub iterations: usize,
}

pub(crate) fn floor_normalize(block: &mut [f64]) {
    let total: f64 = block.iter().sum();
    for v in block.iter_mut() {
        *v = (*v / total).max(INTERIOR_FLOOR);
    }
    let total: f64 = block.iter().sum();
    block.iter_mut().for_each(|v| *v /= total);
}

/// Frank–Wolfe gap `Σ_b (max_i s·g_i - Σ_i x_i s·g_i)`.
fn frank_wolfe_gap(x: &[Vec<f64>], g: &[Vec<f64>], sign: f64) -> f64 {
    if g.iter().flatten().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    x.iter()
        .zip(g)
        .map(|(xb, gb)| {
            let mean: f64 = xb.iter().zip(gb).map(|(a, b)| a * sign * b).sum();
            let top = gb
                .iter()
                .map(|v| sign * v)
                .fold(f64::NEG_INFINITY, f64::max);
            (top - mean).max(0.0)
        })
        .sum()
}

/// Mirror-descent sufficient-progress test: the gain must at least match
/// the linear model minus the KL proximity term `KL(c ‖ x) / step`.
/// Steps that overshoot the local curvature fail it, which keeps the
/// backtracking from settling on an oscillating step size.
fn sufficient(
    x: &[Vec<f64>],
    c: &[Vec<f64>],
    g: &[Vec<f64>],
    gain: f64,
    sign: f64,
    step: f64,
) -> bool {
    let mut linear = 0.0;
    let mut kl = 0.0;
    for ((xb, cb), gb) in x.iter().zip(c).zip(g) {
        for ((&xi, &ci), &gi) in xb.iter().zip(cb).zip(gb) {
            linear += sign * gi * (ci - xi);
            kl += ci * (ci / xi).ln();
        }
    }
    gain >= linear - kl.max(0.0) / step
}

struct Run {
    point: Vec<Vec<f64>>,
    value: f64,
    initial_value: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
}

fn eg_run<O: Objective + ?Sized>(
    objective: &O,
    start: Vec<Vec<f64>>,
    direction: Direction,
    cfg: &OptimizerConfig,
) -> Run {
    let sign = direction.sign();
    let mut x = start;
    x.iter_mut().for_each(|b| floor_normalize(b));
    let mut f = objective.value(&x);
    let initial_value = f;
    let mut grad: Vec<Vec<f64>> = x.iter().map(|b| vec![0.0; b.len()]).collect();
    let mut candidate = x.clone();
    let mut step = cfg.step_init;
    let mut residual = f64::INFINITY;
    if !f.is_finite() {
        return Run {
            point: x,
            value: f,
            initial_value,
            residual,
            iterations: 0,
            converged: false,
        };
    }
    for it in 0..cfg.max_iters {
        objective.gradient(&x, &mut grad);
        residual = frank_wolfe_gap(&x, &grad, sign) / (1.0 + f.abs());
        if residual <= cfg.tolerance || !residual.is_finite() {
            let converged = residual.is_finite();
            return Run {
                point: x,
                value: f,
                initial_value,
                residual,
                iterations: it,
                converged,
            };
        }
        let mut accepted = false;
        for _ in 0..100 {
            for ((cb, xb), gb) in candidate.iter_mut().zip(&x).zip(&grad) {
                let top = gb
                    .iter()
                    .map(|v| sign * v)
                    .fold(f64::NEG_INFINITY, f64::max);
                for ((c, &xi), &gi) in cb.iter_mut().zip(xb).zip(gb) {
                    *c = xi * (step * (sign * gi - top)).exp();
                }
                floor_normalize(cb);
            }
            let fc = objective.value(&candidate);
            if fc.is_finite()
                && sign * (fc - f) > 0.0
                && sufficient(&x, &candidate, &grad, sign * (fc - f), sign, step)
            {
                std::mem::swap(&mut x, &mut candidate);
                f = fc;
                step *= 2.0;
                accepted = true;
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                break;
            }
        }
        if !accepted {
            // No representable improvement along the mirror direction.
            return Run {
                point: x,
                value: f,
                initial_value,
                residual,
                iterations: it,
                converged: true,
            };
        }
    }
    Run {
        point: x,
        value: f,
        initial_value,
        residual,
        iterations: cfg.max_iters,
        converged: residual <= cfg.tolerance,
    }
}

/// Entries at most this large are candidates for removal from the
/// reported point.
const SNAP_THRESHOLD: f64 = 1e-9;

/// Zeroes entries pinned at the interior floor when the boundary point is
/// finite and no worse.
fn snap_to_boundary<O: Objective + ?Sized>(objective: &O, run: &mut Run, direction: Direction) {
    let mut snapped = run.point.clone();
    let mut changed = false;
    for block in snapped.iter_mut() {
        if block.iter().any(|&v| v > 0.0 && v <= SNAP_THRESHOLD) {
            block.iter_mut().filter(|v| **v <= SNAP_THRESHOLD).for_each(|v| *v = 0.0);
            let total: f64 = block.iter().sum();
            block.iter_mut().for_each(|v| *v /= total);
            changed = true;
        }
    }
    if !changed {
        return;
    }
    let value = objective.value(&snapped);
    if value.is_finite() && !direction.better(run.value, value) {
        run.point = snapped;
        run.value = value;
    }
}

/// Draws a point uniformly from each simplex of the product.
pub(crate) fn random_point<R: Rng>(rng: &mut R, shape: &[usize]) -> Vec<Vec<f64>> {
    shape.iter().map(|&n| flat_dirichlet(rng, n)).collect()
}

/// Exponentiated-gradient optimization over a product of simplices, starting
/// from the uniform point and `cfg.restarts - 1` seeded random points.
pub fn eg_optimize<O: Objective + ?Sized>(
    objective: &O,
    shape: &[usize],
    direction: Direction,
    cfg: &OptimizerConfig,
) -> Result<EgOutcome> {
    let start = shape.iter().map(|&n| vec![1.0 / n as f64; n]).collect();
    eg_optimize_from(objective, start, direction, cfg)
}

/// As [`eg_optimize`], with the first restart at `init`.
pub fn eg_optimize_from<O: Objective + ?Sized>(
    objective: &O,
    init: Vec<Vec<f64>>,
    direction: Direction,
    cfg: &OptimizerConfig,
) -> Result<EgOutcome> {
    cfg.validate()?;
    if init.is_empty() || init.iter().any(|b| b.is_empty()) {
        return Err(Error::Empty);
    }
    let shape: Vec<usize> = init.iter().map(Vec::len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<Run> = None;
    let mut worst_residual: f64 = 0.0;
    let mut max_iterations = 0;
    let mut any_finite_start = false;
    let mut start = Some(init);
    for _ in 0..cfg.restarts.max(1) {
        let x0 = start
            .take()
            .unwrap_or_else(|| random_point(&mut rng, &shape));
        let run = eg_run(objective, x0, direction, cfg);
        any_finite_start |= run.initial_value.is_finite();
        max_iterations = max_iterations.max(run.iterations);
        if !run.converged {
            worst_residual = worst_residual.max(run.residual);
            continue;
        }
        if best
            .as_ref()
            .map_or(true, |b| direction.better(run.value, b.value))
        {
            best = Some(run);
        }
    }
    let Some(mut best) = best else {
        if !any_finite_start {
            return Err(Error::DomainError(
                "objective is not finite at any starting point".into(),
            ));
        }
        return Err(Error::ConvergenceFailure {
            iterations: max_iterations,
            residual: worst_residual,
        });
    };
    snap_to_boundary(objective, &mut best, direction);
    Ok(EgOutcome {
        point: best.point,
        value: best.value,
        initial_value: best.initial_value,
        residual: best.residual,
        iterations: best.iterations,
    })
}

/// Which engine produced an Augustin mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugustinEngine {
    /// `α = 1`: the minimizer is the output marginal.
    Marginal,
    FixedPoint,
    ExponentiatedGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugustinOutcome {
    pub q_y: Pmf,
    /// `E_p[D_α(W(·|X) ‖ q_y)]`.
    pub value: f64,
    pub engine: AugustinEngine,
    pub iterations: usize,
    /// L∞ change of each fixed-point step.
    pub residuals: Vec<f64>,
}

/// Restriction of an input/channel pair to the outputs reachable under `p`.
struct Reduced {
    p: Vec<f64>,
    /// `W(y|x)` for reachable `y`, rows with `p(x) > 0` only.
    rows: Vec<Vec<f64>>,
    outputs: Vec<usize>,
    ny: usize,
}

impl Reduced {
    fn new(p: &Pmf, w: &Channel) -> Self {
        let joint = compose_joint(p, w).expect("dimensions checked by caller");
        let outputs: Vec<usize> = (0..w.ny()).filter(|&y| joint.p_y()[y] > 0.0).collect();
        let (p, rows) = (0..w.nx())
            .filter(|&x| p.get(x) > 0.0)
            .map(|x| {
                (
                    p.get(x),
                    outputs.iter().map(|&y| w.w(x, y)).collect::<Vec<_>>(),
                )
            })
            .unzip();
        Self {
            p,
            rows,
            outputs,
            ny: w.ny(),
        }
    }

    fn expand(&self, q: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.ny];
        for (&y, &v) in self.outputs.iter().zip(q) {
            full[y] = v;
        }
        full
    }
}

/// `Σ_y W(y)^α q(y)^{1-α}` over positive `W`.
fn tilted_mass(row: &[f64], q: &[f64], alpha: f64) -> f64 {
    row.iter()
        .zip(q)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, &qy)| w.powf(alpha) * qy.powf(1.0 - alpha))
        .sum()
}

/// The Augustin–Csiszár objective `Σ_x p(x) D_α(W(·|x) ‖ q)`.
fn augustin_objective(red: &Reduced, q: &[f64], alpha: f64) -> f64 {
    red.p
        .iter()
        .zip(&red.rows)
        .map(|(&px, row)| px * tilted_mass(row, q, alpha).ln() / (alpha - 1.0))
        .sum()
}

fn augustin_gradient(red: &Reduced, q: &[f64], alpha: f64, grad: &mut [f64]) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    for (&px, row) in red.p.iter().zip(&red.rows) {
        let z = tilted_mass(row, q, alpha);
        for ((g, &w), &qy) in grad.iter_mut().zip(row).zip(q) {
            if w > 0.0 {
                *g -= px * w.powf(alpha) * qy.powf(-alpha) / z;
            }
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid_order(alpha, "order must lie in (0,1) ∪ (1,∞)"))
    }
}

/// Minimizes `E_p[D_α(W(·|X) ‖ q)]` over output distributions `q`.
///
/// Iterates `q ← Σ_x p(x) W(·|x)^α q^{1-α} / Σ_y W(y|x)^α q(y)^{1-α}` from
/// the output marginal until the L∞ step falls below `cfg.tolerance`. For
/// `α > 1` each step is geometrically averaged with the previous iterate,
/// with weight `1/α` on the new one. If
/// the step size stops shrinking, or the iteration budget runs out, the
/// current iterate seeds an exponentiated-gradient descent on the same
/// (convex) objective.
pub fn augustin_fixed_point(
    p: &Pmf,
    w: &Channel,
    alpha: f64,
    cfg: &OptimizerConfig,
) -> Result<AugustinOutcome> {
    check_alpha(alpha)?;
    cfg.validate()?;
    if p.len() != w.nx() {
        return Err(Error::DimensionMismatch {
            what: "channel input alphabet",
            expected: w.nx(),
            found: p.len(),
        });
    }
    let red = Reduced::new(p, w);
    let marginal: Vec<f64> = {
        let joint = compose_joint(p, w)?;
        red.outputs.iter().map(|&y| joint.p_y()[y]).collect()
    };
    if is_unit(alpha) {
        let value = red
            .p
            .iter()
            .zip(&red.rows)
            .map(|(&px, row)| {
                px * row
                    .iter()
                    .zip(&marginal)
                    .filter(|(&wy, _)| wy > 0.0)
                    .map(|(&wy, &qy)| wy * (wy / qy).ln())
                    .sum::<f64>()
            })
            .sum::<f64>()
            .max(0.0);
        return Ok(AugustinOutcome {
            q_y: Pmf::from_normalized(w.y_labels().to_vec(), red.expand(&marginal)),
            value,
            engine: AugustinEngine::Marginal,
            iterations: 0,
            residuals: Vec::new(),
        });
    }

    let damped = alpha > 1.0;
    let mut q = marginal;
    let mut next = vec![0.0; q.len()];
    let mut residuals = Vec::new();
    let mut mark = f64::INFINITY;
    let mut since_mark = 0usize;
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (&px, row) in red.p.iter().zip(&red.rows) {
            let z = tilted_mass(row, &q, alpha);
            for ((n, &wy), &qy) in next.iter_mut().zip(row).zip(&q) {
                if wy > 0.0 {
                    *n += px * wy.powf(alpha) * qy.powf(1.0 - alpha) / z;
                }
            }
        }
        if damped {
            // In log coordinates the undamped map has Jacobian eigenvalues in
            // [1 - α, 0]; the geometric step of weight 1/α maps them into [0, 1).
            let lambda = 1.0 / alpha;
            next.iter_mut()
                .zip(&q)
                .for_each(|(n, &qy)| *n = n.powf(lambda) * qy.powf(1.0 - lambda));
        }
        floor_normalize(&mut next);
        let change = next
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut q, &mut next);
        residuals.push(change);
        if change < cfg.tolerance {
            converged = true;
            break;
        }
        if change < 0.5 * mark {
            mark = change;
            since_mark = 0;
        } else {
            since_mark += 1;
            if since_mark >= AUGUSTIN_PLATEAU {
                break;
            }
        }
    }
    let iterations = residuals.len();
    if converged {
        let value = augustin_objective(&red, &q, alpha).max(0.0);
        return Ok(AugustinOutcome {
            q_y: Pmf::from_normalized(w.y_labels().to_vec(), red.expand(&q)),
            value,
            engine: AugustinEngine::FixedPoint,
            iterations,
            residuals,
        });
    }

    let objective = WithGradient(
        |pt: &[Vec<f64>]| augustin_objective(&red, &pt[0], alpha),
        |pt: &[Vec<f64>], g: &mut [Vec<f64>]| augustin_gradient(&red, &pt[0], alpha, &mut g[0]),
    );
    let single = OptimizerConfig {
        restarts: 1,
        ..cfg.clone()
    };
    let out = eg_optimize_from(&objective, vec![q], Direction::Minimize, &single)?;
    Ok(AugustinOutcome {
        q_y: Pmf::from_normalized(w.y_labels().to_vec(), red.expand(&out.point[0])),
        value: out.value.max(0.0),
        engine: AugustinEngine::ExponentiatedGradient,
        iterations: iterations + out.iterations,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub q_x: Pmf,
    pub q_y: Pmf,
    /// `D_α(p_{XY} ‖ q_X ⊗ q_Y)`.
    pub value: f64,
    pub iterations: usize,
    /// Objective after each full (q_X, q_Y) sweep.
    pub values: Vec<f64>,
}

/// `D_α(P ‖ q_x ⊗ q_y)` summed over the support of `P`.
pub(crate) fn product_divergence(matrix: &[Vec<f64>], q_x: &[f64], q_y: &[f64], alpha: f64) -> f64 {
    let mut s = 0.0;
    for (row, &qx) in matrix.iter().zip(q_x) {
        for (&pxy, &qy) in row.iter().zip(q_y) {
            if pxy > 0.0 {
                s += pxy.powf(alpha) * (qx * qy).powf(1.0 - alpha);
            }
        }
    }
    s.ln() / (alpha - 1.0)
}

/// Exact minimizer of `D_α(P ‖ q_x ⊗ q)` over `q` for fixed `q_x`:
/// `q(y) ∝ (Σ_x P(x,y)^α q_x(x)^{1-α})^{1/α}`.
pub(crate) fn lp_coordinate_step(matrix: &[Vec<f64>], q_x: &[f64], alpha: f64) -> Vec<f64> {
    let ny = matrix[0].len();
    let mut q: Vec<f64> = (0..ny)
        .map(|y| {
            matrix
                .iter()
                .zip(q_x)
                .filter(|(row, _)| row[y] > 0.0)
                .map(|(row, &qx)| row[y].powf(alpha) * qx.powf(1.0 - alpha))
                .sum::<f64>()
                .powf(1.0 / alpha)
        })
        .collect();
    let s: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= s);
    q
}

fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..m[0].len())
        .map(|j| m.iter().map(|r| r[j]).collect())
        .collect()
}

/// Minimizes `D_α(p_{XY} ‖ q_X ⊗ q_Y)` by alternating exact coordinate
/// updates, starting from the marginals. Each update is an exact
/// minimization, so the recorded values never increase.
pub fn lp_alternating(joint: &JointDist, alpha: f64, cfg: &OptimizerConfig) -> Result<LpOutcome> {
    if !(alpha > 0.5) || !alpha.is_finite() || is_unit(alpha) {
        return Err(invalid_order(
            alpha,
            "Lapidoth–Pfister order must lie in (1/2,1) ∪ (1,∞)",
        ));
    }
    cfg.validate()?;
    let m = joint.matrix();
    let mt = transpose(m);
    let mut q_x = joint.p_x().to_vec();
    let mut q_y = joint.p_y().to_vec();
    let mut value = product_divergence(m, &q_x, &q_y, alpha);
    let mut values = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        q_x = lp_coordinate_step(&mt, &q_y, alpha);
        q_y = lp_coordinate_step(m, &q_x, alpha);
        let next = product_divergence(m, &q_x, &q_y, alpha);
        values.push(next);
        let change = (value - next).abs();
        value = next;
        if change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        let last = values.len();
        let residual = if last >= 2 {
            (values[last - 2] - values[last - 1]).abs()
        } else {
            f64::INFINITY
        };
        return Err(Error::ConvergenceFailure {
            iterations: cfg.max_iters,
            residual,
        });
    }
    Ok(LpOutcome {
        q_x: Pmf::from_normalized(joint.x_labels().to_vec(), q_x),
        q_y: Pmf::from_normalized(joint.y_labels().to_vec(), q_y),
        value: value.max(0.0),
        iterations: values.len(),
        values,
    })
}
