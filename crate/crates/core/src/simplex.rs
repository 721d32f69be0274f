//! Finite distributions: probability mass functions, channels, joints and
//! decision rules.
//!
//! Every type here is validated at construction and immutable afterwards.
//! Labels are opaque strings carried along for I/O; all arithmetic is
//! index-based. Zero-probability symbols stay at zero under every operation
//! (`0^β = 0` for `β > 0`).

use crate::error::{invalid_order, Error, Result};

/// Accepted deviation of an input distribution's total mass from 1.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Drift tolerated between cached and recomputed quantities.
pub const DRIFT_TOL: f64 = 1e-12;

fn default_labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn check_labels(labels: &[String], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: n,
            found: labels.len(),
        });
    }
    let mut seen = std::collections::HashSet::with_capacity(n);
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidLabels(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// Validates a weight vector and returns the normalized probabilities.
fn normalize_weights(weights: &[f64], renormalize: bool) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::Empty);
    }
    for (index, &value) in weights.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeWeight { index, value });
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroTotal);
    }
    if renormalize {
        Ok(weights.iter().map(|w| w / total).collect())
    } else if (total - 1.0).abs() <= NORMALIZATION_TOL {
        // Strict inputs are stored verbatim so that serialization round-trips.
        Ok(weights.to_vec())
    } else {
        Err(Error::NotNormalized { sum: total })
    }
}

/// A probability mass function on a finite, labelled alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    labels: Vec<String>,
    probs: Vec<f64>,
}

/// Builds a [`Pmf`] from nonnegative weights.
///
/// With `renormalize` the weights are divided by their total; otherwise they
/// must already sum to one within [`NORMALIZATION_TOL`].
///
/// ```
/// use alphaleak::make_pmf;
///
/// let p = make_pmf(&[2.0, 6.0], true).unwrap();
/// assert_eq!(p.probs(), &[0.25, 0.75]);
/// assert!(make_pmf(&[0.3, 0.6], false).is_err());
/// ```
pub fn make_pmf(weights: &[f64], renormalize: bool) -> Result<Pmf> {
    Pmf::new(weights, renormalize)
}

impl Pmf {
    pub fn new(weights: &[f64], renormalize: bool) -> Result<Self> {
        let probs = normalize_weights(weights, renormalize)?;
        Ok(Self {
            labels: default_labels("x", probs.len()),
            probs,
        })
    }

    pub fn with_labels(labels: Vec<String>, weights: &[f64], renormalize: bool) -> Result<Self> {
        let probs = normalize_weights(weights, renormalize)?;
        check_labels(&labels, probs.len())?;
        Ok(Self { labels, probs })
    }

    /// Uniform distribution on `n` symbols.
    ///
    /// # Panics
    ///
    /// Panics if `n == 0`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one symbol");
        Self {
            labels: default_labels("x", n),
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// Point mass on symbol `at` of an `n`-symbol alphabet.
    ///
    /// # Panics
    ///
    /// Panics if `at >= n`.
    pub fn point_mass(n: usize, at: usize) -> Self {
        assert!(at < n, "point mass index out of range");
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self {
            labels: default_labels("x", n),
            probs,
        }
    }

    /// Wraps nonnegative weights computed internally, dividing by their total.
    pub(crate) fn from_normalized(labels: Vec<String>, mut probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        debug_assert!(total > 0.0 && total.is_finite(), "total {total}");
        if total != 1.0 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        Self { labels, probs }
    }

    pub(crate) fn from_vec(probs: Vec<f64>) -> Self {
        let labels = default_labels("x", probs.len());
        Self::from_normalized(labels, probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Number of symbols with positive mass.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Same distribution under new labels.
    pub fn relabel(&self, labels: Vec<String>) -> Result<Self> {
        check_labels(&labels, self.len())?;
        Ok(Self {
            labels,
            probs: self.probs.clone(),
        })
    }

    /// The `β`-tilted (escort) distribution `p(x)^β / Σ p^β`.
    ///
    /// ```
    /// use alphaleak::make_pmf;
    ///
    /// let p = make_pmf(&[0.8, 0.2], false).unwrap();
    /// let t = p.tilt(2.0).unwrap();
    /// assert!((t.get(0) - 16.0 / 17.0).abs() < 1e-15);
    /// ```
    pub fn tilt(&self, beta: f64) -> Result<Pmf> {
        check_positive_order(beta)?;
        Ok(Pmf::from_normalized(
            self.labels.clone(),
            tilt_slice(&self.probs, beta),
        ))
    }

    /// `‖p‖_β = (Σ p^β)^{1/β}`.
    pub fn p_norm(&self, beta: f64) -> Result<f64> {
        check_positive_order(beta)?;
        Ok(power_sum(&self.probs, beta).powf(1.0 / beta))
    }

    pub fn l1_distance(&self, other: &Pmf) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                what: "pmf length",
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(l1(&self.probs, &other.probs))
    }
}

/// Free-function form of [`Pmf::tilt`].
pub fn tilt(p: &Pmf, beta: f64) -> Result<Pmf> {
    p.tilt(beta)
}

/// Free-function form of [`Pmf::p_norm`].
pub fn p_norm(p: &Pmf, beta: f64) -> Result<f64> {
    p.p_norm(beta)
}

fn check_positive_order(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(invalid_order(beta, "order must be a positive finite real"))
    }
}

/// `Σ v^β` over the positive entries of `v`.
pub(crate) fn power_sum(v: &[f64], beta: f64) -> f64 {
    v.iter().filter(|&&x| x > 0.0).map(|&x| x.powf(beta)).sum()
}

/// Tilts a nonnegative (possibly unnormalized) vector; the result sums to one.
pub(crate) fn tilt_slice(v: &[f64], beta: f64) -> Vec<f64> {
    let powered: Vec<f64> = v
        .iter()
        .map(|&x| if x > 0.0 { x.powf(beta) } else { 0.0 })
        .collect();
    let total: f64 = powered.iter().sum();
    powered.into_iter().map(|x| x / total).collect()
}

pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn validate_row(row: &[f64], width: usize) -> std::result::Result<(), String> {
    if row.len() != width {
        return Err(format!("has {} entries, expected {width}", row.len()));
    }
    if let Some((i, v)) = row
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(format!("entry {i} is {v}, expected a nonnegative number"));
    }
    let total: f64 = row.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(format!("sums to {total}, expected 1 within 1e-9"));
    }
    Ok(())
}

/// A row-stochastic kernel `W(y|x)` from `X` to `Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        Self::with_labels(default_labels("x", nx), default_labels("y", ny), rows)
    }

    pub fn with_labels(
        x_labels: Vec<String>,
        y_labels: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Empty);
        }
        let ny = rows[0].len();
        for (row, r) in rows.iter().enumerate() {
            validate_row(r, ny).map_err(|reason| Error::InvalidRow { row, reason })?;
        }
        check_labels(&x_labels, rows.len())?;
        check_labels(&y_labels, ny)?;
        Ok(Self {
            x_labels,
            y_labels,
            rows,
        })
    }

    /// Noiseless channel on `n` symbols.
    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(rows).expect("identity rows are valid")
    }

    /// Binary symmetric channel with crossover probability `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        Self::new(vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]])
    }

    /// Channel whose output ignores the input: every row equals `row`.
    pub fn constant(nx: usize, row: &[f64]) -> Result<Self> {
        Self::new(vec![row.to_vec(); nx])
    }

    pub fn nx(&self) -> usize {
        self.rows.len()
    }

    pub fn ny(&self) -> usize {
        self.y_labels.len()
    }

    pub fn w(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn row_pmf(&self, x: usize) -> Pmf {
        Pmf {
            labels: self.y_labels.clone(),
            probs: self.rows[x].clone(),
        }
    }

    fn check_input(&self, p: &Pmf) -> Result<()> {
        if p.len() != self.nx() {
            return Err(Error::DimensionMismatch {
                what: "channel input alphabet",
                expected: self.nx(),
                found: p.len(),
            });
        }
        Ok(())
    }
}

/// A joint distribution `p(x, y)` with cached marginals and posteriors.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    x_labels: Vec<String>,
    y_labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
    p_x: Vec<f64>,
    p_y: Vec<f64>,
    posteriors: Vec<Option<Vec<f64>>>,
}

impl JointDist {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let nx = matrix.len();
        let ny = matrix.first().map_or(0, Vec::len);
        Self::with_labels(default_labels("x", nx), default_labels("y", ny), matrix)
    }

    pub fn with_labels(
        x_labels: Vec<String>,
        y_labels: Vec<String>,
        matrix: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if matrix.is_empty() || matrix[0].is_empty() {
            return Err(Error::Empty);
        }
        let ny = matrix[0].len();
        let mut total = 0.0;
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != ny {
                return Err(Error::InvalidRow {
                    row,
                    reason: format!("has {} entries, expected {ny}", r.len()),
                });
            }
            for (index, &value) in r.iter().enumerate() {
                if !(value >= 0.0) || !value.is_finite() {
                    return Err(Error::NegativeWeight {
                        index: row * ny + index,
                        value,
                    });
                }
                total += value;
            }
        }
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum: total });
        }
        check_labels(&x_labels, matrix.len())?;
        check_labels(&y_labels, ny)?;
        Ok(Self::from_matrix(x_labels, y_labels, matrix))
    }

    fn from_matrix(x_labels: Vec<String>, y_labels: Vec<String>, matrix: Vec<Vec<f64>>) -> Self {
        let ny = y_labels.len();
        let p_x: Vec<f64> = matrix.iter().map(|r| r.iter().sum()).collect();
        let p_y: Vec<f64> = (0..ny).map(|y| matrix.iter().map(|r| r[y]).sum()).collect();
        let posteriors = (0..ny)
            .map(|y| (p_y[y] > 0.0).then(|| matrix.iter().map(|r| r[y] / p_y[y]).collect()))
            .collect();
        Self {
            x_labels,
            y_labels,
            matrix,
            p_x,
            p_y,
            posteriors,
        }
    }

    pub fn nx(&self) -> usize {
        self.x_labels.len()
    }

    pub fn ny(&self) -> usize {
        self.y_labels.len()
    }

    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.matrix[x][y]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn p_y(&self) -> &[f64] {
        &self.p_y
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn y_labels(&self) -> &[String] {
        &self.y_labels
    }

    pub fn marginal_x(&self) -> Pmf {
        Pmf::from_normalized(self.x_labels.clone(), self.p_x.clone())
    }

    pub fn marginal_y(&self) -> Pmf {
        Pmf::from_normalized(self.y_labels.clone(), self.p_y.clone())
    }

    /// `p(·|y)`, absent when `p_Y(y) = 0`.
    pub fn posterior(&self, y: usize) -> Option<&[f64]> {
        self.posteriors[y].as_deref()
    }

    /// Splits the joint into `p_X` and `p_{Y|X}`.
    ///
    /// Rows of the channel outside the support of `p_X` are not determined by
    /// the joint; they are set to uniform.
    pub fn decompose(&self) -> (Pmf, Channel) {
        let ny = self.ny();
        let rows = self
            .matrix
            .iter()
            .zip(&self.p_x)
            .map(|(r, &px)| {
                if px > 0.0 {
                    let mut row: Vec<f64> = r.iter().map(|v| v / px).collect();
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= s);
                    row
                } else {
                    vec![1.0 / ny as f64; ny]
                }
            })
            .collect();
        let channel = Channel {
            x_labels: self.x_labels.clone(),
            y_labels: self.y_labels.clone(),
            rows,
        };
        (self.marginal_x(), channel)
    }
}

/// Joint distribution `p(x) W(y|x)`.
///
/// ```
/// use alphaleak::{compose_joint, Channel, Pmf};
///
/// let joint = compose_joint(&Pmf::uniform(2), &Channel::bsc(0.1).unwrap()).unwrap();
/// assert!((joint.posterior(0).unwrap()[0] - 0.9).abs() < 1e-12);
/// ```
pub fn compose_joint(p: &Pmf, w: &Channel) -> Result<JointDist> {
    w.check_input(p)?;
    let matrix = w
        .rows
        .iter()
        .zip(p.probs())
        .map(|(row, &px)| row.iter().map(|&v| px * v).collect())
        .collect();
    Ok(JointDist::from_matrix(
        w.x_labels.clone(),
        w.y_labels.clone(),
        matrix,
    ))
}

/// An adversary's decision rule: one distribution over `X` per observation `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule {
    components: Vec<Vec<f64>>,
}

impl DecisionRule {
    pub fn new(components: Vec<Vec<f64>>) -> Result<Self> {
        if components.is_empty() || components[0].is_empty() {
            return Err(Error::Empty);
        }
        let nx = components[0].len();
        for (row, c) in components.iter().enumerate() {
            validate_row(c, nx).map_err(|reason| Error::InvalidRow { row, reason })?;
        }
        Ok(Self { components })
    }

    /// The rule that ignores the observation.
    pub fn constant(r: &Pmf, ny: usize) -> Self {
        Self {
            components: vec![r.probs().to_vec(); ny],
        }
    }

    pub(crate) fn from_raw(components: Vec<Vec<f64>>) -> Self {
        Self { components }
    }

    pub fn nx(&self) -> usize {
        self.components[0].len()
    }

    pub fn ny(&self) -> usize {
        self.components.len()
    }

    /// `r(x|y)`.
    pub fn r(&self, x: usize, y: usize) -> f64 {
        self.components[y][x]
    }

    pub fn component(&self, y: usize) -> &[f64] {
        &self.components[y]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn make_pmf_examples() {
        assert_eq!(make_pmf(&[1.0, 1.0], true).unwrap().probs(), &[0.5, 0.5]);
        assert_eq!(make_pmf(&[0.3, 0.7], false).unwrap().probs(), &[0.3, 0.7]);
        assert_eq!(make_pmf(&[2.0, 6.0], true).unwrap().probs(), &[0.25, 0.75]);
    }

    #[test]
    fn make_pmf_errors() {
        assert!(matches!(
            make_pmf(&[0.5, -0.1], true),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        assert_eq!(make_pmf(&[0.0, 0.0], true), Err(Error::ZeroTotal));
        assert!(matches!(
            make_pmf(&[0.5, 0.49], false),
            Err(Error::NotNormalized { .. })
        ));
        assert_eq!(make_pmf(&[], true), Err(Error::Empty));
        assert!(make_pmf(&[f64::NAN, 1.0], true).is_err());
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err = Pmf::with_labels(vec!["a".into(), "a".into()], &[0.5, 0.5], false);
        assert!(matches!(err, Err(Error::InvalidLabels(_))));
    }

    #[test]
    fn tilt_examples() {
        let u = Pmf::uniform(5);
        for beta in [0.3, 1.0, 2.5] {
            assert!(u.tilt(beta).unwrap().l1_distance(&u).unwrap() < 1e-15);
        }
        let p = make_pmf(&[0.8, 0.2], false).unwrap();
        let t = p.tilt(2.0).unwrap();
        assert!(close(t.get(0), 16.0 / 17.0, 1e-15));
        assert!(close(t.get(1), 1.0 / 17.0, 1e-15));
        assert!(p.tilt(1.0).unwrap().l1_distance(&p).unwrap() < 1e-15);
        assert!(matches!(p.tilt(0.0), Err(Error::InvalidOrder { .. })));
        assert!(matches!(p.tilt(-1.0), Err(Error::InvalidOrder { .. })));
    }

    #[test]
    fn tilt_keeps_zeros() {
        let p = make_pmf(&[0.0, 0.4, 0.6], false).unwrap();
        for beta in [0.1, 0.5, 3.0] {
            assert_eq!(p.tilt(beta).unwrap().get(0), 0.0);
        }
    }

    #[test]
    fn p_norm_examples() {
        assert!(close(Pmf::uniform(4).p_norm(2.0).unwrap(), 0.5, 1e-15));
        let p = make_pmf(&[0.8, 0.2], false).unwrap();
        assert!(close(p.p_norm(1.0).unwrap(), 1.0, 1e-15));
        assert!(close(p.p_norm(2.0).unwrap(), 0.68f64.sqrt(), 1e-15));
        assert!(close(p.p_norm(2.0).unwrap(), 0.824621, 1e-6));
    }

    #[test]
    fn compose_examples() {
        let j = compose_joint(&Pmf::uniform(2), &Channel::identity(2)).unwrap();
        assert_eq!(j.matrix(), &[vec![0.5, 0.0], vec![0.0, 0.5]]);

        let p = make_pmf(&[0.2, 0.3, 0.5], false).unwrap();
        let w = Channel::constant(3, &[0.6, 0.4]).unwrap();
        let j = compose_joint(&p, &w).unwrap();
        for y in 0..2 {
            assert!(l1(j.posterior(y).unwrap(), p.probs()) < 1e-15);
        }

        let j = compose_joint(&Pmf::uniform(2), &Channel::bsc(0.1).unwrap()).unwrap();
        assert!(close(j.p_y()[0], 0.5, 1e-15));
        assert!(close(j.posterior(0).unwrap()[0], 0.9, 1e-12));
    }

    #[test]
    fn compose_dimension_mismatch() {
        let err = compose_joint(&Pmf::uniform(3), &Channel::identity(2));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_mass_observation_has_no_posterior() {
        let w = Channel::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let j = compose_joint(&Pmf::uniform(2), &w).unwrap();
        assert!(j.posterior(0).is_some());
        assert!(j.posterior(1).is_none());
    }

    #[test]
    fn channel_row_error_names_row() {
        let err = Channel::new(vec![vec![0.5, 0.5], vec![0.5, 0.49]]).unwrap_err();
        assert!(matches!(err, Error::InvalidRow { row: 1, .. }));
        assert!(err.to_string().contains("row 1"));
    }

    #[test]
    fn joint_validation() {
        assert!(JointDist::new(vec![vec![0.25, 0.25], vec![0.25, 0.24]]).is_err());
        assert!(JointDist::new(vec![vec![0.25, 0.25], vec![0.5]]).is_err());
        let j = JointDist::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert_eq!(j.p_x(), &[0.5, 0.5]);
    }

    #[test]
    fn decision_rule_validation() {
        assert!(DecisionRule::new(vec![vec![0.5, 0.5], vec![0.9, 0.2]]).is_err());
        let r = DecisionRule::new(vec![vec![0.5, 0.5], vec![0.9, 0.1]]).unwrap();
        assert_eq!(r.r(0, 1), 0.9);
        assert_eq!((r.nx(), r.ny()), (2, 2));
    }
}
