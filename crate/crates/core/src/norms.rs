//! Norms on R^n, the sliding-window norm, and property checkers for
//! contractivity of the isotonic projection.
//!
//! A seminorm makes `iso` a contraction exactly when it is nonincreasing
//! under neighbor averaging (NUNA): replacing two adjacent entries by their
//! mean never increases it. [`check_nuna`] and [`check_contraction`] test the
//! two sides empirically; [`build_counterexample`] turns any NUNA violation
//! into an explicit pair on which `iso` expands the norm.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::iso::{average_pair, pava_slice, Sequence};
use crate::window::PrefixSums;

/// Absolute slack on the discrete concavity check of `m / psi(m)`.
pub const PSI_CONCAVITY_TOL: f64 = 1e-12;
/// Absolute slack used by the NUNA and contraction checkers.
pub const PROPERTY_TOL: f64 = 1e-12;
/// Tolerance on the internal identities verified by [`build_counterexample`].
pub const COUNTEREXAMPLE_TOL: f64 = 1e-9;

/// Window weights `psi(1), ..., psi(n_max)`, indexed by window length.
///
/// Construction enforces positivity, monotonicity and discrete midpoint
/// concavity of `m / psi(m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiSpec {
    values: Vec<f64>,
}

/// Result of [`validate_psi`]. Violations are reported by window length (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiReport {
    /// First `m` with `psi(m) > psi(m + 1)`.
    pub monotone_violation: Option<usize>,
    /// First `m` with `g(m - 1) + g(m + 1) > 2 g(m) + tol`, `g(m) = m / psi(m)`.
    pub concavity_violation: Option<usize>,
}

impl PsiReport {
    pub fn passed(&self) -> bool {
        self.monotone_violation.is_none() && self.concavity_violation.is_none()
    }
}

/// Checks the shape conditions on a tabulated `psi(1..=n_max)`.
pub fn validate_psi(values: &[f64]) -> Result<PsiReport> {
    if values.is_empty() {
        return invalid("psi table is empty");
    }
    if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return invalid(format!(
            "psi({}) = {} is not a positive finite number",
            i + 1,
            values[i]
        ));
    }
    let monotone_violation = values.windows(2).position(|w| w[0] > w[1]).map(|i| i + 1);
    let g = |idx: usize| (idx + 1) as f64 / values[idx];
    let concavity_violation = (1..values.len().saturating_sub(1))
        .find(|&i| g(i - 1) + g(i + 1) > 2.0 * g(i) + PSI_CONCAVITY_TOL)
        .map(|i| i + 1);
    Ok(PsiReport {
        monotone_violation,
        concavity_violation,
    })
}

impl PsiSpec {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let report = validate_psi(&values)?;
        if let Some(m) = report.monotone_violation {
            return invalid(format!("psi is not nondecreasing at window length {m}"));
        }
        if let Some(m) = report.concavity_violation {
            return invalid(format!("m / psi(m) is not concave at window length {m}"));
        }
        Ok(Self { values })
    }

    /// `psi(m) = sqrt(m)`, the weight matched to subgaussian noise.
    pub fn sqrt(n_max: usize) -> Self {
        Self {
            values: (1..=n_max.max(1)).map(|m| (m as f64).sqrt()).collect(),
        }
    }

    pub fn constant(n_max: usize) -> Self {
        Self {
            values: vec![1.0; n_max.max(1)],
        }
    }

    /// Largest window length covered.
    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    /// `psi(m)` for window length `m >= 1`.
    #[inline]
    pub fn at(&self, m: usize) -> f64 {
        self.values[m - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn require_cover(&self, n: usize) -> Result<()> {
        if self.values.len() < n {
            return invalid(format!(
                "psi covers window lengths up to {} but the sequence has length {n}",
                self.values.len()
            ));
        }
        Ok(())
    }
}

/// `max_{i <= j} |mean(x[i..=j])| * psi(j - i + 1)`, O(n^2).
pub fn sliding_window_norm(x: &Sequence, psi: &PsiSpec) -> Result<f64> {
    psi.require_cover(x.len())?;
    Ok(sw_norm_slice(x, psi))
}

pub(crate) fn sw_norm_slice(x: &[f64], psi: &PsiSpec) -> f64 {
    let n = x.len();
    let prefix = PrefixSums::new(x);
    let mut best: f64 = 0.0;
    for m in 1..=n {
        let w = psi.at(m) / m as f64;
        let mut widest: f64 = 0.0;
        for start in 0..=n - m {
            widest = widest.max(prefix.sum(start, start + m).abs());
        }
        best = best.max(widest * w);
    }
    best
}

/// The l_p norm for `p` in `[1, inf]`.
pub fn lp_norm(x: &Sequence, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return invalid(format!("p must be in [1, inf], got {p}"));
    }
    Ok(lp_slice(x, p))
}

fn lp_slice(x: &[f64], p: f64) -> f64 {
    if p == f64::INFINITY {
        x.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
    } else if p == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// An evaluable seminorm on R^n.
pub trait Norm: Send + Sync {
    fn name(&self) -> &str;

    fn eval(&self, x: &[f64]) -> f64;

    fn permutation_invariant(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub struct LpNorm {
    p: f64,
    name: String,
}

impl LpNorm {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return invalid(format!("p must be in [1, inf], got {p}"));
        }
        let name = if p == f64::INFINITY {
            "linf".to_string()
        } else {
            format!("l{p}")
        };
        Ok(Self { p, name })
    }
}

impl Norm for LpNorm {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: &[f64]) -> f64 {
        lp_slice(x, self.p)
    }

    fn permutation_invariant(&self) -> bool {
        true
    }
}

/// Sliding-window norm with a fixed weight table.
///
/// Evaluating on a vector longer than the table panics.
#[derive(Debug, Clone)]
pub struct SlidingWindowNorm {
    psi: PsiSpec,
    name: String,
}

impl SlidingWindowNorm {
    pub fn new(psi: PsiSpec, name: impl Into<String>) -> Self {
        Self {
            psi,
            name: name.into(),
        }
    }

    pub fn sqrt(n_max: usize) -> Self {
        Self::new(PsiSpec::sqrt(n_max), "sw-sqrt")
    }

    pub fn psi(&self) -> &PsiSpec {
        &self.psi
    }
}

impl Norm for SlidingWindowNorm {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: &[f64]) -> f64 {
        assert!(
            x.len() <= self.psi.n_max(),
            "psi table of length {} is too short for a vector of length {}",
            self.psi.n_max(),
            x.len()
        );
        sw_norm_slice(x, &self.psi)
    }
}

/// `|x_0|`: a seminorm that is not NUNA.
#[derive(Debug, Clone, Copy, Default)]
pub struct FirstCoordinate;

impl Norm for FirstCoordinate {
    fn name(&self) -> &str {
        "first-coord"
    }

    fn eval(&self, x: &[f64]) -> f64 {
        x.first().map_or(0.0, |v| v.abs())
    }
}

/// Adapts a closure into a [`Norm`].
pub struct FnNorm<F> {
    name: String,
    f: F,
    permutation_invariant: bool,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnNorm<F> {
    pub fn new(name: impl Into<String>, permutation_invariant: bool, f: F) -> Self {
        Self {
            name: name.into(),
            f,
            permutation_invariant,
        }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Norm for FnNorm<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn permutation_invariant(&self) -> bool {
        self.permutation_invariant
    }
}

pub const BUILTIN_NORMS: [&str; 5] = ["l1", "l2", "linf", "sw-sqrt", "first-coord"];

/// Looks up a built-in norm. `n_max` sizes the weight table of `sw-sqrt`.
pub fn builtin_norm(name: &str, n_max: usize) -> Option<Box<dyn Norm>> {
    let norm: Box<dyn Norm> = match name {
        "l1" => Box::new(LpNorm::new(1.0).ok()?),
        "l2" => Box::new(LpNorm::new(2.0).ok()?),
        "linf" => Box::new(LpNorm::new(f64::INFINITY).ok()?),
        "sw-sqrt" => Box::new(SlidingWindowNorm::sqrt(n_max)),
        "first-coord" => Box::new(FirstCoordinate),
        _ => return None,
    };
    Some(norm)
}

/// A vector and pair index on which neighbor averaging increased the norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NunaViolation {
    pub x: Sequence,
    pub i: usize,
    pub before: f64,
    pub after: f64,
}

/// Tests `||A_i x|| <= ||x|| + tol` for every sample and pair index.
///
/// Returns the first violation in (sample, index) order, or `None`.
pub fn check_nuna(norm: &dyn Norm, samples: &[Sequence]) -> Option<NunaViolation> {
    let mut buf = Vec::new();
    for x in samples {
        let before = norm.eval(x);
        for i in 0..x.len().saturating_sub(1) {
            buf.clear();
            buf.extend_from_slice(x);
            average_pair(&mut buf, i);
            let after = norm.eval(&buf);
            if after > before + PROPERTY_TOL {
                return Some(NunaViolation {
                    x: x.clone(),
                    i,
                    before,
                    after,
                });
            }
        }
    }
    None
}

/// A pair on which `||iso(z) - iso(y)|| > ||z - y||`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionWitness {
    pub y: Sequence,
    pub z: Sequence,
    /// `||iso(z) - iso(y)||`
    pub lhs: f64,
    /// `||z - y||`
    pub rhs: f64,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

/// Tests `||iso(z) - iso(y)|| <= ||z - y|| + tol` on each pair `(y, z)`.
pub fn check_contraction(
    norm: &dyn Norm,
    pairs: &[(Sequence, Sequence)],
) -> Result<Option<ContractionWitness>> {
    if let Some(k) = pairs.iter().position(|(a, b)| a.len() != b.len()) {
        return invalid(format!(
            "pair {k} has mismatched lengths {} and {}",
            pairs[k].0.len(),
            pairs[k].1.len()
        ));
    }
    for (y, z) in pairs {
        let iy = pava_slice(y);
        let iz = pava_slice(z);
        let lhs = norm.eval(&sub(&iz.fitted, &iy.fitted));
        let rhs = norm.eval(&sub(z, y));
        if lhs > rhs + PROPERTY_TOL {
            return Ok(Some(ContractionWitness {
                y: y.clone(),
                z: z.clone(),
                lhs,
                rhs,
            }));
        }
    }
    Ok(None)
}

/// A constructed contraction failure plus the residuals of the identities
/// `iso(z) = z` and `iso(z) - iso(y) = A_i x` it relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub witness: ContractionWitness,
    /// `max_j |iso(z)_j - z_j|`
    pub fixed_point_residual: f64,
    /// `max_j |(iso(z) - iso(y))_j - (A_i x)_j|`
    pub averaging_residual: f64,
}

/// Builds `y, z` with `z - y = x` and `iso(z) - iso(y) = A_i x`.
///
/// Requires `||A_i x|| > ||x||` and `x_i <= x_{i+1}`; negate `x` first when the
/// pair is decreasing. With `B = max_j |x_j - x_{j+1}|` and `D = x_{i+1} - x_i`,
/// `y` descends by `B` to the left of `i`, is `(D, 0)` at `(i, i + 1)` and
/// ascends by `B` afterwards, so that `y + x` is already sorted while `iso(y)`
/// only pools the pair `(D, 0)`.
pub fn build_counterexample(norm: &dyn Norm, x: &Sequence, i: usize) -> Result<Counterexample> {
    let n = x.len();
    if i + 1 >= n {
        return invalid(format!("pair index {i} out of range for length {n}"));
    }
    let mut averaged = x.to_vec();
    average_pair(&mut averaged, i);
    let before = norm.eval(x);
    let after = norm.eval(&averaged);
    if !(after > before) {
        return invalid(format!(
            "neighbor averaging at {i} does not increase the norm ({after} <= {before})"
        ));
    }
    if x[i] > x[i + 1] {
        return invalid(format!(
            "x[{i}] > x[{}]; pass -x to build the counterexample",
            i + 1
        ));
    }
    let b = x
        .windows(2)
        .map(|w| (w[0] - w[1]).abs())
        .fold(0.0, f64::max);
    let d = x[i + 1] - x[i];
    let y: Vec<f64> = (0..n)
        .map(|j| {
            if j < i {
                d - (i - j) as f64 * b
            } else if j == i {
                d
            } else if j == i + 1 {
                0.0
            } else {
                (j - i - 1) as f64 * b
            }
        })
        .collect();
    let z: Vec<f64> = y.iter().zip(x.iter()).map(|(a, c)| a + c).collect();
    let iso_y = pava_slice(&y);
    let iso_z = pava_slice(&z);
    let fixed_point_residual = iso_z
        .fitted
        .iter()
        .zip(&z)
        .map(|(a, c)| (a - c).abs())
        .fold(0.0, f64::max);
    let diff = sub(&iso_z.fitted, &iso_y.fitted);
    let averaging_residual = diff
        .iter()
        .zip(&averaged)
        .map(|(a, c)| (a - c).abs())
        .fold(0.0, f64::max);
    if fixed_point_residual > COUNTEREXAMPLE_TOL || averaging_residual > COUNTEREXAMPLE_TOL {
        return invalid(format!(
            "construction lost precision (residuals {fixed_point_residual:e}, {averaging_residual:e})"
        ));
    }
    let lhs = norm.eval(&diff);
    let rhs = norm.eval(&sub(&z, &y));
    if !(lhs > rhs) {
        return invalid(format!(
            "rounding erased the violation (lhs {lhs} <= rhs {rhs})"
        ));
    }
    Ok(Counterexample {
        witness: ContractionWitness {
            y: Sequence::new(y)?,
            z: Sequence::new(z)?,
            lhs,
            rhs,
        },
        fixed_point_residual,
        averaging_residual,
    })
}

/// Feeds a NUNA violation into [`build_counterexample`], negating `x` when
/// the averaged pair is decreasing.
pub fn counterexample_from_violation(
    norm: &dyn Norm,
    violation: &NunaViolation,
) -> Result<Counterexample> {
    let i = violation.i;
    if violation.x[i] <= violation.x[i + 1] {
        build_counterexample(norm, &violation.x, i)
    } else {
        let neg = Sequence::new(violation.x.iter().map(|v| -v).collect())?;
        build_counterexample(norm, &neg, i)
    }
}

/// `sigma * sqrt(2 log((n^2 + n) / delta))`: with probability at least
/// `1 - delta` the sqrt-weighted sliding-window norm of the noise is below this.
pub fn sw_subgaussian_threshold(n: usize, sigma: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_sigma(sigma)?;
    check_n(n)?;
    Ok(sigma * (2.0 * log_pairs_over_delta(n, delta)).sqrt())
}

/// `(sigma sqrt(2 log(n^2 + n)), 8 sigma^2 log(n^2 + n))`: bounds on the first
/// and second moments of the sqrt-weighted sliding-window norm of the noise.
pub fn sw_expectation_bounds(n: usize, sigma: f64) -> Result<(f64, f64)> {
    check_sigma(sigma)?;
    check_n(n)?;
    let l = pairs(n).ln();
    Ok((sigma * (2.0 * l).sqrt(), 8.0 * sigma * sigma * l))
}

#[inline]
pub(crate) fn pairs(n: usize) -> f64 {
    let n = n as f64;
    n * n + n
}

/// `log((n^2 + n) / delta)`
#[inline]
pub(crate) fn log_pairs_over_delta(n: usize, delta: f64) -> f64 {
    (pairs(n) / delta).ln()
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return invalid(format!(
            "sigma must be a nonnegative finite number, got {sigma}"
        ));
    }
    Ok(())
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    Ok(())
}

/// Default probe set for [`check_nuna`]: `per_length` Gaussian vectors at each
/// length in `{2, 3, 5, 10, 50}`, plus alternating-sign and single-spike
/// vectors at the same lengths.
pub fn nuna_probe_samples(per_length: usize, seed: u64) -> Vec<Sequence> {
    const LENGTHS: [usize; 5] = [2, 3, 5, 10, 50];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &n in &LENGTHS {
        out.push(Sequence::from_trusted(
            (0..n)
                .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 })
                .collect(),
        ));
        for s in 0..n {
            let mut v = vec![0.0; n];
            v[s] = 1.0;
            out.push(Sequence::from_trusted(v));
        }
    }
    for &n in &LENGTHS {
        for _ in 0..per_length {
            out.push(gaussian_sequence(&mut rng, n));
        }
    }
    out
}

/// `count` independent Gaussian pairs of length `n`.
pub fn random_pairs(n: usize, count: usize, seed: u64) -> Vec<(Sequence, Sequence)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (
                gaussian_sequence(&mut rng, n),
                gaussian_sequence(&mut rng, n),
            )
        })
        .collect()
}

pub(crate) fn gaussian_sequence(rng: &mut impl Rng, n: usize) -> Sequence {
    Sequence::from_trusted(
        (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[f64]) -> Sequence {
        Sequence::from_slice(v).unwrap()
    }

    #[test]
    fn psi_shape_examples() {
        let sqrt: Vec<f64> = (1..=100).map(|i| (i as f64).sqrt()).collect();
        assert!(validate_psi(&sqrt).unwrap().passed());

        // g(m) = 1/m: g(1) + g(3) = 1.333 > 2 g(2) = 1.
        let square: Vec<f64> = (1..=10).map(|i| (i * i) as f64).collect();
        let r = validate_psi(&square).unwrap();
        assert_eq!(r.monotone_violation, None);
        assert_eq!(r.concavity_violation, Some(2));
        assert!(PsiSpec::new(square).is_err());

        assert!(validate_psi(&[1.0; 10]).unwrap().passed());
        assert_eq!(
            validate_psi(&[2.0, 1.0]).unwrap().monotone_violation,
            Some(1)
        );
        assert!(validate_psi(&[1.0, 0.0]).is_err());
        assert!(validate_psi(&[]).is_err());
    }

    #[test]
    fn sliding_window_examples() {
        let psi = PsiSpec::sqrt(3);
        assert_eq!(sliding_window_norm(&seq(&[1.0, -1.0]), &psi).unwrap(), 1.0);
        assert_eq!(
            sliding_window_norm(&seq(&[0.0, 0.0, 0.0]), &psi).unwrap(),
            0.0
        );
        let v = sliding_window_norm(&seq(&[2.0, 2.0, 2.0]), &psi).unwrap();
        assert!((v - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!(sliding_window_norm(&seq(&[1.0; 4]), &psi).is_err());
    }

    #[test]
    fn lp_examples() {
        let x = seq(&[3.0, -4.0]);
        assert_eq!(lp_norm(&x, 2.0).unwrap(), 5.0);
        assert_eq!(lp_norm(&x, f64::INFINITY).unwrap(), 4.0);
        assert_eq!(lp_norm(&seq(&[1.0, 1.0, 1.0]), 1.0).unwrap(), 3.0);
        assert!((lp_norm(&x, 3.0).unwrap() - 91f64.cbrt()).abs() < 1e-12);
        assert!(lp_norm(&x, 0.5).is_err());
        assert!(lp_norm(&x, f64::NAN).is_err());
    }

    #[test]
    fn first_coordinate_violates_nuna() {
        let v = check_nuna(&FirstCoordinate, &[seq(&[0.0, 2.0])]).unwrap();
        assert_eq!(v.i, 0);
        assert_eq!(v.before, 0.0);
        assert_eq!(v.after, 1.0);
    }

    #[test]
    fn counterexample_for_first_coordinate() {
        let c = build_counterexample(&FirstCoordinate, &seq(&[0.0, 2.0]), 0).unwrap();
        assert_eq!(c.witness.y.as_slice(), &[2.0, 0.0]);
        assert_eq!(c.witness.z.as_slice(), &[2.0, 2.0]);
        assert_eq!(c.witness.lhs, 1.0);
        assert_eq!(c.witness.rhs, 0.0);
        assert_eq!(c.fixed_point_residual, 0.0);
        assert_eq!(c.averaging_residual, 0.0);
    }

    #[test]
    fn counterexample_preconditions() {
        let l2 = LpNorm::new(2.0).unwrap();
        assert!(build_counterexample(&l2, &seq(&[0.0, 2.0]), 0).is_err());
        // Averaging increases |x_0| but the pair is decreasing.
        assert!(build_counterexample(&FirstCoordinate, &seq(&[0.0, -2.0]), 0).is_err());
        assert!(build_counterexample(&FirstCoordinate, &seq(&[0.0, 2.0]), 1).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = sw_subgaussian_threshold(1000, 1.0, 0.1).unwrap();
        assert!((t - 5.6780).abs() < 1e-3, "{t}");
        assert_eq!(sw_subgaussian_threshold(1000, 0.0, 0.1).unwrap(), 0.0);
        let delta = 2.0 / std::f64::consts::E.powi(2);
        assert!((sw_subgaussian_threshold(1, 1.0, delta).unwrap() - 2.0).abs() < 1e-12);
        assert!(sw_subgaussian_threshold(10, 1.0, 0.0).is_err());
        assert!(sw_subgaussian_threshold(10, 1.0, 1.0).is_err());
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(sw_expectation_bounds(10, 0.0).unwrap(), (0.0, 0.0));
        let (m, s) = sw_expectation_bounds(1000, 1.0).unwrap();
        assert!((m - 5.2567).abs() < 1e-3, "{m}");
        assert!((s - 110.53).abs() < 1e-2, "{s}");
        assert!(s >= m * m);
    }

    #[test]
    fn registry() {
        for name in BUILTIN_NORMS {
            assert_eq!(builtin_norm(name, 10).unwrap().name(), name);
        }
        assert!(builtin_norm("l3", 10).is_none());
        assert!(builtin_norm("l2", 10).unwrap().permutation_invariant());
    }

    #[test]
    fn probe_samples_cover_structured_vectors() {
        let s = nuna_probe_samples(3, 1);
        assert_eq!(s.len(), 5 + (2 + 3 + 5 + 10 + 50) + 5 * 3);
        assert_eq!(s, nuna_probe_samples(3, 1));
    }
}
