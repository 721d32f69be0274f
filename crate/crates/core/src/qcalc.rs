//! Deformed logarithms and Kolmogorov–Nagumo means.
//!
//! `ln_q x = (x^{1-q} - 1) / (1 - q)` and its inverse
//! `exp_q u = [1 + (1-q) u]^{1/(1-q)}` interpolate between the ordinary
//! logarithm (`q = 1`) and affine maps (`q = 0` gives `x - 1`). They are
//! evaluated through `expm1`/`ln_1p` so that orders close to one do not lose
//! precision; within [`UNIT_ORDER_TOL`] of one the natural-log branch is
//! used outright.
//!
//! An [`Aggregator`] is a strictly monotone generator `φ` for the
//! quasi-arithmetic mean `M_φ[V] = φ⁻¹(E[φ(V)])`. Every aggregator here is an
//! affine image `a·β + b` of an increasing base `β ∈ {t, ln t, ln_q t}`;
//! a negative scale gives a decreasing generator with the same mean.

use crate::error::{invalid_order, Error, Result};
use crate::simplex::{power_sum, Pmf};

/// Orders within this distance of one use the logarithmic branch.
pub const UNIT_ORDER_TOL: f64 = 1e-8;

pub(crate) fn is_unit(q: f64) -> bool {
    (q - 1.0).abs() <= UNIT_ORDER_TOL
}

/// Unchecked `ln_q`. `ln_q(0)` is `-1/(1-q)` for `q < 1` and `-∞` otherwise.
pub(crate) fn ln_q(x: f64, q: f64) -> f64 {
    if is_unit(q) {
        x.ln()
    } else if x == 0.0 {
        if q < 1.0 {
            -1.0 / (1.0 - q)
        } else {
            f64::NEG_INFINITY
        }
    } else {
        ((1.0 - q) * x.ln()).exp_m1() / (1.0 - q)
    }
}

/// Unchecked `exp_q`; NaN where the base is negative, and the limiting value
/// where it is zero.
pub(crate) fn exp_q(u: f64, q: f64) -> f64 {
    if is_unit(q) {
        return u.exp();
    }
    let shifted = (1.0 - q) * u;
    if shifted < -1.0 {
        f64::NAN
    } else {
        (shifted.ln_1p() / (1.0 - q)).exp()
    }
}

/// `ln exp_q(u)`, finite over a wider range than `exp_q` itself.
pub(crate) fn ln_exp_q(u: f64, q: f64) -> f64 {
    if is_unit(q) {
        u
    } else {
        ((1.0 - q) * u).ln_1p() / (1.0 - q)
    }
}

/// `ln_q(e^l)`.
pub(crate) fn ln_q_of_exp(l: f64, q: f64) -> f64 {
    if is_unit(q) {
        l
    } else {
        ((1.0 - q) * l).exp_m1() / (1.0 - q)
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() {
        Ok(())
    } else {
        Err(invalid_order(q, "deformation parameter must be finite"))
    }
}

/// The q-logarithm.
///
/// At `x = 0` the value is `-1/(1-q)` for `q < 1`; for `q ≥ 1` it is
/// returned as `-∞` rather than an error, so that boundary points can still
/// be compared by optimizers.
///
/// ```
/// use alphaleak::q_log;
///
/// assert_eq!(q_log(1.0, 0.3).unwrap(), 0.0);
/// assert!((q_log(0.25, 0.5).unwrap() + 1.0).abs() < 1e-15);
/// assert_eq!(q_log(0.0, 2.0).unwrap(), f64::NEG_INFINITY);
/// ```
pub fn q_log(x: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    if !(x >= 0.0) {
        return Err(Error::DomainError(format!("ln_q undefined at {x}")));
    }
    Ok(ln_q(x, q))
}

/// The q-exponential, inverse of [`q_log`]. Requires `1 + (1-q) x > 0`.
pub fn q_exp(x: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    if x.is_nan() {
        return Err(Error::DomainError("exp_q of NaN".into()));
    }
    if !is_unit(q) && !(1.0 + (1.0 - q) * x > 0.0) {
        return Err(Error::DomainError(format!(
            "exp_q base 1 + (1-q)x = {} is not positive",
            1.0 + (1.0 - q) * x
        )));
    }
    Ok(exp_q(x, q))
}

/// Base generator of an [`Aggregator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AggregatorKind {
    /// `β(t) = t`; the mean is the expectation.
    Linear,
    /// `β(t) = ln t`; the geometric mean.
    Log,
    /// `β(t) = ln_q t`; the power (Hölder) mean of order `1 - q`.
    QLog(f64),
}

/// A strictly monotone generator `φ(t) = scale·β(t) + offset` for
/// Kolmogorov–Nagumo means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregator {
    kind: AggregatorKind,
    scale: f64,
    offset: f64,
    increasing: bool,
}

impl Aggregator {
    pub fn linear() -> Self {
        Self::build(AggregatorKind::Linear, 1.0, 0.0).expect("identity is monotone")
    }

    pub fn log() -> Self {
        Self::build(AggregatorKind::Log, 1.0, 0.0).expect("ln is monotone")
    }

    pub fn q_log(q: f64) -> Result<Self> {
        check_q(q)?;
        Self::build(AggregatorKind::QLog(q), 1.0, 0.0)
    }

    /// `a·φ + b`. A negative `a` yields a decreasing generator.
    pub fn affine(self, a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::DomainError(format!(
                "affine map with scale {a} and offset {b} is not invertible"
            )));
        }
        Self::build(self.kind, self.scale * a, self.offset * a + b)
    }

    fn build(kind: AggregatorKind, scale: f64, offset: f64) -> Result<Self> {
        let mut agg = Self {
            kind,
            scale,
            offset,
            increasing: true,
        };
        agg.increasing = agg.sampled_direction()?;
        Ok(agg)
    }

    /// Checks strict monotonicity and the inverse on sample points, returning
    /// the direction.
    fn sampled_direction(&self) -> Result<bool> {
        const POSITIVE: [f64; 8] = [1e-3, 0.01, 0.1, 0.3, 0.5, 1.0, 2.0, 4.0];
        const SIGNED: [f64; 7] = [-100.0, -2.0, -0.5, 0.0, 0.5, 2.0, 100.0];
        let samples: &[f64] = match self.kind {
            AggregatorKind::Linear => &SIGNED,
            _ => &POSITIVE,
        };
        let values: Vec<f64> = samples.iter().map(|&t| self.forward(t)).collect();
        let increasing = values[1] > values[0];
        for (w, t) in values.windows(2).zip(samples.windows(2)) {
            if (w[1] > w[0]) != increasing || w[1] == w[0] || !w[1].is_finite() {
                return Err(Error::DomainError(format!(
                    "generator is not strictly monotone between {} and {}",
                    t[0], t[1]
                )));
            }
        }
        for (&t, &v) in samples.iter().zip(&values) {
            let back = self.inverse(v);
            // exp_q amplifies relative error by t^{q-1} for q > 1.
            let cond = match self.kind {
                AggregatorKind::QLog(q) => t.powf(q - 1.0).max(1.0),
                _ => 1.0,
            };
            if (back - t).abs() > 1e-12 * t.abs().max(1.0) * cond {
                return Err(Error::DomainError(format!(
                    "inverse round trip at {t} returned {back}"
                )));
            }
        }
        Ok(increasing)
    }

    pub fn kind(&self) -> AggregatorKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    /// Deformation order of the base when it is `ln` (order 1) or `ln_q`.
    pub(crate) fn log_order(&self) -> Option<f64> {
        match self.kind {
            AggregatorKind::Linear => None,
            AggregatorKind::Log => Some(1.0),
            AggregatorKind::QLog(q) => Some(q),
        }
    }

    /// Open interval on which the generator is defined and finite.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            AggregatorKind::Linear => (f64::NEG_INFINITY, f64::INFINITY),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub(crate) fn base(&self, t: f64) -> f64 {
        match self.kind {
            AggregatorKind::Linear => t,
            AggregatorKind::Log => t.ln(),
            AggregatorKind::QLog(q) => {
                if t < 0.0 {
                    f64::NAN
                } else {
                    ln_q(t, q)
                }
            }
        }
    }

    fn base_inverse(&self, u: f64) -> f64 {
        match self.kind {
            AggregatorKind::Linear => u,
            AggregatorKind::Log => u.exp(),
            AggregatorKind::QLog(q) => exp_q(u, q),
        }
    }

    fn base_derivative(&self, t: f64) -> f64 {
        match self.kind {
            AggregatorKind::Linear => 1.0,
            AggregatorKind::Log => 1.0 / t,
            AggregatorKind::QLog(q) => t.powf(-q),
        }
    }

    /// `φ(t)`.
    pub fn forward(&self, t: f64) -> f64 {
        self.scale * self.base(t) + self.offset
    }

    /// `φ⁻¹(u)`.
    pub fn inverse(&self, u: f64) -> f64 {
        self.base_inverse((u - self.offset) / self.scale)
    }

    /// `φ'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        self.scale * self.base_derivative(t)
    }

    /// `φ(ψ⁻¹(t))` where `self = φ` and `inner = ψ`.
    ///
    /// For two logarithmic generators the composition is evaluated in log
    /// space, avoiding the round trip through `ψ⁻¹`.
    pub fn compose_inverse(&self, inner: &Aggregator, t: f64) -> f64 {
        if self.same_base(inner) {
            return self.scale / inner.scale * (t - inner.offset) + self.offset;
        }
        match (self.log_order(), inner.log_order()) {
            (Some(a), Some(b)) => {
                let l = ln_exp_q((t - inner.offset) / inner.scale, b);
                self.scale * ln_q_of_exp(l, a) + self.offset
            }
            _ => self.forward(inner.inverse(t)),
        }
    }

    /// Whether the two generators differ only by their affine parts, so that
    /// `φ∘ψ⁻¹` is affine on all of ℝ.
    fn same_base(&self, other: &Aggregator) -> bool {
        match (self.log_order(), other.log_order()) {
            (Some(a), Some(b)) => a == b,
            (None, None) => self.kind == other.kind,
            _ => false,
        }
    }

    /// Derivative of [`Aggregator::compose_inverse`] in `t`.
    pub fn compose_inverse_derivative(&self, inner: &Aggregator, t: f64) -> f64 {
        if self.same_base(inner) {
            return self.scale / inner.scale;
        }
        match (self.log_order(), inner.log_order()) {
            (Some(a), Some(b)) => {
                let l = ln_exp_q((t - inner.offset) / inner.scale, b);
                self.scale / inner.scale * ((b - a) * l).exp()
            }
            _ => {
                let u = inner.inverse(t);
                self.derivative(u) / inner.derivative(u)
            }
        }
    }
}

/// Kolmogorov–Nagumo mean `φ⁻¹(Σ p(x) φ(v_x))`.
///
/// ```
/// use alphaleak::{kn_mean, Aggregator, Pmf};
///
/// let p = Pmf::uniform(2);
/// let g = kn_mean(&p, &[1.0, 4.0], &Aggregator::log()).unwrap();
/// assert!((g - 2.0).abs() < 1e-12);
/// ```
pub fn kn_mean(p: &Pmf, values: &[f64], phi: &Aggregator) -> Result<f64> {
    if values.len() != p.len() {
        return Err(Error::DimensionMismatch {
            what: "kn_mean values",
            expected: p.len(),
            found: values.len(),
        });
    }
    let (lo, hi) = phi.domain();
    let mut acc = 0.0;
    for (&w, &v) in p.probs().iter().zip(values) {
        if !(v > lo || (v == lo && v == 0.0)) || !(v < hi) {
            return Err(Error::DomainError(format!(
                "value {v} outside the generator domain ({lo}, {hi})"
            )));
        }
        if w > 0.0 {
            acc += w * phi.forward(v);
        }
    }
    Ok(phi.inverse(acc))
}

/// Maximizer and maximum of `r ↦ Σ p(x) ln_q r(x)` over the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsOptimum {
    pub value: f64,
    pub argmax: Pmf,
}

/// Maximum of `Σ p ln_q r` over distributions `r`: the value
/// `ln_q ‖p‖_{1/q}^{1/(1-q)} = (‖p‖_{1/q} - 1)/(1-q)`, attained at the
/// `1/q`-tilt of `p`. Near `q = 1` this is the classical Gibbs inequality
/// (value `-H(p)`, maximizer `p`).
pub fn gibbs_optimum(p: &Pmf, q: f64) -> Result<GibbsOptimum> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(invalid_order(q, "Gibbs order must lie in (0, ∞)"));
    }
    let value = gibbs_value(p.probs(), q);
    let argmax = if is_unit(q) {
        p.clone()
    } else {
        p.tilt(1.0 / q)?
    };
    Ok(GibbsOptimum { value, argmax })
}

/// The Gibbs maximum for a normalized probability vector.
pub(crate) fn gibbs_value(p: &[f64], q: f64) -> f64 {
    if is_unit(q) {
        p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum()
    } else {
        (q * power_sum(p, 1.0 / q).ln()).exp_m1() / (1.0 - q)
    }
}

/// Outcome of [`reverse_holder_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    /// `Σ a_i b_i`.
    pub lhs: f64,
    /// `(Σ a^{1/p})^p (Σ b^{1/(1-p)})^{1-p}`.
    pub rhs: f64,
    /// Whether the inequality holds in the direction fixed by `p`
    /// (`lhs ≥ rhs` for `p > 1`, `lhs ≤ rhs` for `p < 1`).
    pub satisfied: bool,
    /// Relative gap `|lhs - rhs| / max(|lhs|, |rhs|)`.
    pub equality_within: f64,
}

/// Evaluates both sides of the reverse Hölder inequality.
pub fn reverse_holder_check(a: &[f64], b: &[f64], p: f64) -> Result<HolderReport> {
    if !(p > 0.0) || !p.is_finite() || is_unit(p) {
        return Err(invalid_order(p, "exponent must lie in (0,1) ∪ (1,∞)"));
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            what: "reverse Hölder vectors",
            expected: a.len(),
            found: b.len(),
        });
    }
    if let Some(v) = a.iter().chain(b).find(|v| !(**v >= 0.0)) {
        return Err(Error::DomainError(format!("entry {v} is negative")));
    }
    let lhs: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let sa: f64 = a.iter().map(|x| x.powf(1.0 / p)).sum();
    let sb: f64 = b.iter().map(|y| y.powf(1.0 / (1.0 - p))).sum();
    let rhs = sa.powf(p) * sb.powf(1.0 - p);
    let slack = 1e-12 * lhs.abs().max(rhs.abs());
    let satisfied = if p > 1.0 {
        lhs >= rhs - slack
    } else {
        lhs <= rhs + slack
    };
    let scale = lhs.abs().max(rhs.abs());
    let equality_within = if scale > 0.0 {
        (lhs - rhs).abs() / scale
    } else {
        0.0
    };
    Ok(HolderReport {
        lhs,
        rhs,
        satisfied,
        equality_within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_pmf;

    #[test]
    fn q_log_examples() {
        for q in [-1.0, 0.0, 0.5, 2.0] {
            assert_eq!(q_log(1.0, q).unwrap(), 0.0);
        }
        assert!((q_log(std::f64::consts::E, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((q_log(0.25, 0.5).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn q_log_at_zero() {
        assert_eq!(q_log(0.0, 0.5).unwrap(), -2.0);
        assert_eq!(q_log(0.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(q_log(0.0, 3.0).unwrap(), f64::NEG_INFINITY);
        assert!(q_log(-0.1, 0.5).is_err());
    }

    #[test]
    fn q_exp_examples() {
        for q in [-1.0, 0.5, 1.0, 2.0] {
            assert_eq!(q_exp(0.0, q).unwrap(), 1.0);
        }
        assert!((q_exp(0.5, 2.0).unwrap() - 2.0).abs() < 1e-15);
        let t = q_exp(q_log(0.3, 0.7).unwrap(), 0.7).unwrap();
        assert!((t - 0.3).abs() < 1e-15);
        assert!(matches!(q_exp(1.0, 2.0), Err(Error::DomainError(_))));
        assert!(matches!(q_exp(-3.0, 0.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn q_exp_inverts_q_log_on_log_grid() {
        for q in [0.25, 0.5, 2.0, 4.0] {
            for k in 0..=90 {
                let t = 1e-6 * 10f64.powf(k as f64 / 10.0);
                let back = q_exp(q_log(t, q).unwrap(), q).unwrap();
                // exp_q has relative condition number t^{q-1} · |ln_q t|.
                let cond = t.powf(q - 1.0).max(1.0);
                assert!(
                    (back - t).abs() <= 1e-12 * t * cond,
                    "q={q} t={t} back={back}"
                );
            }
        }
    }

    #[test]
    fn q_log_tends_to_ln() {
        for k in 0..=40 {
            let t = 0.01 * 10f64.powf(k as f64 / 10.0);
            for q in [1.0 - 1e-6, 1.0 + 1e-6] {
                assert!((q_log(t, q).unwrap() - t.ln()).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn kn_mean_examples() {
        let p = make_pmf(&[0.3, 0.7], false).unwrap();
        let e = kn_mean(&p, &[2.0, -1.0], &Aggregator::linear()).unwrap();
        assert!((e - (0.6 - 0.7)).abs() < 1e-15);

        let u = Pmf::uniform(2);
        assert!((kn_mean(&u, &[1.0, 4.0], &Aggregator::log()).unwrap() - 2.0).abs() < 1e-12);
        let holder2 = Aggregator::q_log(-1.0).unwrap();
        assert!((kn_mean(&u, &[1.0, 7.0], &holder2).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn kn_mean_rejects_out_of_domain() {
        let u = Pmf::uniform(2);
        assert!(kn_mean(&u, &[-1.0, 4.0], &Aggregator::log()).is_err());
        assert!(kn_mean(&u, &[1.0], &Aggregator::log()).is_err());
    }

    #[test]
    fn affine_generators_keep_the_mean() {
        let p = make_pmf(&[0.2, 0.5, 0.3], false).unwrap();
        let v = [0.4, 1.5, 3.0];
        for base in [Aggregator::log(), Aggregator::q_log(0.5).unwrap()] {
            let m = kn_mean(&p, &v, &base).unwrap();
            for (a, b) in [(2.0, 1.0), (-1.0, 0.0), (-3.5, 7.0)] {
                let shifted = base.affine(a, b).unwrap();
                assert_eq!(shifted.is_increasing(), a > 0.0);
                assert!((kn_mean(&p, &v, &shifted).unwrap() - m).abs() < 1e-12);
            }
        }
        assert!(Aggregator::log().affine(0.0, 1.0).is_err());
    }

    #[test]
    fn composition_matches_round_trip() {
        let phi = Aggregator::q_log(2.0 / 3.0).unwrap();
        let psi = Aggregator::q_log(0.5).unwrap();
        let neg = Aggregator::log().affine(-2.0, 0.5).unwrap();
        for (f, g) in [(phi, psi), (psi, phi), (Aggregator::log(), psi), (neg, phi)] {
            for t in [-0.9, -0.3, 0.0, 0.4, 1.2] {
                let u = g.inverse(t);
                if !u.is_finite() || u <= 0.0 {
                    continue;
                }
                let direct = f.forward(u);
                assert!((f.compose_inverse(&g, t) - direct).abs() < 1e-12 * direct.abs().max(1.0));
                let h = 1e-6;
                let fd = (f.compose_inverse(&g, t + h) - f.compose_inverse(&g, t - h)) / (2.0 * h);
                let d = f.compose_inverse_derivative(&g, t);
                assert!((fd - d).abs() < 1e-6 * d.abs().max(1.0), "fd {fd} d {d}");
            }
        }
    }

    #[test]
    fn gibbs_examples() {
        let u = Pmf::uniform(2);
        let opt = gibbs_optimum(&u, 0.5).unwrap();
        assert!((opt.value - (0.5f64.sqrt() - 1.0) / 0.5).abs() < 1e-15);
        assert!((opt.value + 0.585786).abs() < 1e-6);
        assert!(opt.argmax.l1_distance(&u).unwrap() < 1e-15);

        let p = make_pmf(&[0.8, 0.2], false).unwrap();
        let opt = gibbs_optimum(&p, 0.5).unwrap();
        assert!((opt.argmax.get(0) - 16.0 / 17.0).abs() < 1e-15);
        assert!(gibbs_optimum(&p, 0.0).is_err());
    }

    #[test]
    fn gibbs_matches_fine_grid_on_two_symbols() {
        // Exhaustive scan of the 1-simplex at resolution 1e-3.
        let p = [0.8, 0.2];
        let q = 0.5;
        let best = (0..=1000)
            .map(|k| {
                let r = k as f64 / 1000.0;
                p[0] * ln_q(r, q) + p[1] * ln_q(1.0 - r, q)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let opt = gibbs_optimum(&make_pmf(&p, false).unwrap(), q).unwrap();
        assert!(best <= opt.value + 1e-12);
        assert!(opt.value - best < 1e-5);
    }

    #[test]
    fn reverse_holder_examples() {
        let rep = reverse_holder_check(&[1.0, 1.0], &[1.0, 1.0], 2.0).unwrap();
        assert_eq!((rep.lhs, rep.rhs), (2.0, 2.0));
        assert!(rep.satisfied && rep.equality_within < 1e-15);

        let b = [0.3, 1.7, 0.9, 2.2];
        for p in [0.5, 2.0, 3.5] {
            for c in [0.1, 1.0, 7.0] {
                let a: Vec<f64> = b.iter().map(|x: &f64| c * x.powf(p / (1.0 - p))).collect();
                let rep = reverse_holder_check(&a, &b, p).unwrap();
                assert!(rep.equality_within < 1e-9, "p={p} c={c} {rep:?}");
            }
        }
        assert!(reverse_holder_check(&[1.0], &[1.0, 2.0], 2.0).is_err());
        assert!(reverse_holder_check(&[1.0], &[1.0], 1.0).is_err());
    }
}
