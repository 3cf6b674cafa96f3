//! Grenander estimation of a nonincreasing density on `[0, 1]`.
//!
//! With sorted samples `Z_(1) <= ... <= Z_(n)` and `Z_(0) = 0`, the scaled
//! spacings `y_i = n (Z_(i) - Z_(i-1))` are projected onto the nondecreasing
//! cone; the estimator equals `1 / iso(y)_i` on `(Z_(i-1), Z_(i)]` and `0`
//! beyond `Z_(n)`. This is the left derivative of the least concave majorant
//! of the empirical CDF.
//!
//! The module also carries the finite-sample quantities used to certify the
//! estimator: the uniform band margin of [`grenander_band`] and the
//! order-statistic deviation bounds it is derived from.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::iso::pava_slice;
use crate::norms::{check_delta, check_n, log_pairs_over_delta};

/// Samples in `[0, 1]`, kept sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    sorted: Vec<f64>,
}

impl SampleSet {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return invalid("sample set is empty");
        }
        if let Some(i) = points
            .iter()
            .position(|v| !(v.is_finite() && (0.0..=1.0).contains(v)))
        {
            return invalid(format!("sample {i} = {} lies outside [0, 1]", points[i]));
        }
        points.sort_by(f64::total_cmp);
        Ok(Self { sorted: points })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `Z_(1), ..., Z_(n)`.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// `(1/n) #{i : Z_i <= t}` for `t` in `[0, 1]`.
pub fn empirical_cdf(s: &SampleSet, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return invalid(format!("t = {t} lies outside [0, 1]"));
    }
    let count = s.sorted.partition_point(|&z| z <= t);
    Ok(count as f64 / s.len() as f64)
}

/// A constant stretch `(left, right]` of a piecewise-constant density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    pub left: f64,
    pub right: f64,
    pub value: f64,
}

/// Pools of a streaming Grenander fit, in terms of raw spacings.
#[derive(Debug, Clone, Copy)]
struct SpacingPool {
    sum: f64,
    // kept as f64 so the merge test is two multiplications, not a division
    count: f64,
    right: f64,
}

/// Grenander fit over a stream of sorted points.
///
/// Memory is proportional to the number of constant pieces of the estimate
/// (typically `O(n^(1/3))`), not to the sample size.
#[derive(Debug, Clone)]
pub struct GrenanderStream {
    pools: Vec<SpacingPool>,
    last: f64,
    count: usize,
}

impl Default for GrenanderStream {
    fn default() -> Self {
        Self::new()
    }
}

impl GrenanderStream {
    pub fn new() -> Self {
        Self {
            pools: Vec::new(),
            last: 0.0,
            count: 0,
        }
    }

    /// Adds the next order statistic; points must arrive nondecreasing.
    pub fn push(&mut self, z: f64) -> Result<()> {
        if !(z >= self.last && z <= 1.0) {
            return invalid(format!(
                "point {z} is out of order (previous {}) or outside [0, 1]",
                self.last
            ));
        }
        let mut pool = SpacingPool {
            sum: z - self.last,
            count: 1.0,
            right: z,
        };
        self.last = z;
        self.count += 1;
        // prev.level > pool.level, cross-multiplied
        while let Some(prev) = self.pools.last() {
            if prev.sum * pool.count <= pool.sum * prev.count {
                break;
            }
            pool.sum += prev.sum;
            pool.count += prev.count;
            self.pools.pop();
        }
        self.pools.push(pool);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Constant pieces covering `[0, Z_(n)]`; the density is 0 afterwards.
    pub fn finish(self) -> Result<Vec<DensityPiece>> {
        if self.count == 0 {
            return invalid("no samples were pushed");
        }
        let n = self.count as f64;
        let mut left = 0.0;
        let mut out = Vec::with_capacity(self.pools.len());
        for p in &self.pools {
            let level = p.sum / p.count;
            if !(level > 0.0) {
                return Err(Error::DegenerateSpacings(format!(
                    "{} tied samples at {} pool to a zero spacing",
                    p.count, p.right
                )));
            }
            out.push(DensityPiece {
                left,
                right: p.right,
                value: 1.0 / (n * level),
            });
            left = p.right;
        }
        Ok(out)
    }
}

/// The Grenander estimate as a step function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrenanderEstimate {
    /// `Z_(0) = 0, Z_(1), ..., Z_(n)`.
    pub breakpoints: Vec<f64>,
    /// Value on `(Z_(i), Z_(i+1)]` (on `[0, Z_(1)]` for the first); nonincreasing.
    pub density_values: Vec<f64>,
}

impl GrenanderEstimate {
    /// Left-continuous evaluation; `0` beyond the largest sample.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.density_values[0];
        }
        // first i with Z_(i) >= t, among Z_(1..=n)
        let idx = self.breakpoints[1..].partition_point(|&z| z < t);
        self.density_values.get(idx).copied().unwrap_or(0.0)
    }

    /// `sum_i value_i * (Z_(i) - Z_(i-1))`.
    pub fn total_mass(&self) -> f64 {
        self.density_values
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(v, w)| v * (w[1] - w[0]))
            .sum()
    }

    /// The integrated estimate at each breakpoint.
    pub fn cdf_at_breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.breakpoints.len());
        out.push(0.0);
        for (v, w) in self.density_values.iter().zip(self.breakpoints.windows(2)) {
            acc += v * (w[1] - w[0]);
            out.push(acc);
        }
        out
    }

    /// Maximal constant stretches.
    pub fn pieces(&self) -> Vec<DensityPiece> {
        let mut out: Vec<DensityPiece> = Vec::new();
        for (v, w) in self.density_values.iter().zip(self.breakpoints.windows(2)) {
            match out.last_mut() {
                Some(p) if p.value == *v => p.right = w[1],
                _ => out.push(DensityPiece {
                    left: w[0],
                    right: w[1],
                    value: *v,
                }),
            }
        }
        out
    }
}

/// Fits the Grenander estimator via isotonic projection of scaled spacings.
pub fn grenander_fit(s: &SampleSet) -> Result<GrenanderEstimate> {
    let n = s.len();
    let nf = n as f64;
    let mut breakpoints = Vec::with_capacity(n + 1);
    breakpoints.push(0.0);
    breakpoints.extend_from_slice(&s.sorted);
    let spacings: Vec<f64> = breakpoints.windows(2).map(|w| nf * (w[1] - w[0])).collect();
    let fit = pava_slice(&spacings);
    if let Some(b) = fit.blocks.iter().find(|b| !(b.level > 0.0)) {
        return Err(Error::DegenerateSpacings(format!(
            "samples {}..{} pool to a zero spacing",
            b.start + 1,
            b.end
        )));
    }
    let density_values = fit.fitted.iter().map(|v| 1.0 / v).collect();
    Ok(GrenanderEstimate {
        breakpoints,
        density_values,
    })
}

/// `sup_{lo <= t <= hi} |g(t) - f(t)|` for a step function `f` given by
/// `pieces` on `[0, pieces.last().right]` and `0` up to `1`.
///
/// Exact when `g` is continuous and monotone: on each constant stretch the
/// supremum of `|g - value|` sits at an endpoint.
pub fn sup_abs_error(pieces: &[DensityPiece], g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if lo > hi {
        return 0.0;
    }
    let end = pieces.last().map_or(0.0, |p| p.right);
    let tail = DensityPiece {
        left: end,
        right: 1.0,
        value: 0.0,
    };
    let mut worst: f64 = 0.0;
    for p in pieces.iter().chain(std::iter::once(&tail)) {
        let a = p.left.max(lo);
        let b = p.right.min(hi);
        // (left, right] is open on the left except for the piece at 0
        if a > b || (a == b && a == p.left && p.left > 0.0) {
            continue;
        }
        worst = worst
            .max((g(a) - p.value).abs())
            .max((g(b) - p.value).abs());
    }
    worst
}

/// The uniform band on a Grenander estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBand {
    /// `Delta = 9 (1/c + L/(2c^3)) cbrt(log((n^2 + n)/delta) / n)`; the band
    /// holds on `[Delta, 1 - Delta]`.
    pub margin_delta: f64,
    /// `Delta / (a (a - Delta))` with `a = 1/(c + L)`; `None` when not valid.
    pub half_width: Option<f64>,
    /// `Delta < 1/(c + L)`.
    pub valid: bool,
}

/// Band for a nonincreasing `L`-Lipschitz density bounded below by `c`.
pub fn grenander_band(c: f64, lipschitz: f64, n: usize, delta: f64) -> Result<DensityBand> {
    if !(c > 0.0 && c.is_finite()) {
        return invalid(format!("c must be positive and finite, got {c}"));
    }
    if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
        return invalid(format!("L must be nonnegative and finite, got {lipschitz}"));
    }
    check_delta(delta)?;
    check_n(n)?;
    let rate = (log_pairs_over_delta(n, delta) / n as f64).cbrt();
    let margin_delta = 9.0 * (1.0 / c + lipschitz / (2.0 * c * c * c)) * rate;
    let a = 1.0 / (c + lipschitz);
    let valid = margin_delta < a;
    Ok(DensityBand {
        margin_delta,
        half_width: valid.then(|| margin_delta / (a * (a - margin_delta))),
        valid,
    })
}

/// Joint deviation bound for uniform order statistics:
/// `|U_(j) - U_(i) - (j - i)/n| <= (sqrt(3 (j-i) l) + 2 l) / n`, `l = log((n^2+n)/delta)`,
/// simultaneously over `0 <= i < j <= n` with `U_(0) = 0`.
pub fn uniform_order_stat_bound(n: usize, i: usize, j: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    if !(i < j && j <= n) {
        return invalid(format!(
            "need 0 <= i < j <= n, got i = {i}, j = {j}, n = {n}"
        ));
    }
    let l = log_pairs_over_delta(n, delta);
    Ok(((3.0 * (j - i) as f64 * l).sqrt() + 2.0 * l) / n as f64)
}

/// Marginal deviation bound
/// `|U_(i) - i/n| <= (sqrt(3 i l) + 2 l) / n`, `l = log(2n / delta)`,
/// simultaneously over `1 <= i <= n`.
pub fn uniform_order_stat_marginal_bound(n: usize, i: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_n(n)?;
    if !(1..=n).contains(&i) {
        return invalid(format!("need 1 <= i <= n, got i = {i}, n = {n}"));
    }
    let l = (2.0 * n as f64 / delta).ln();
    Ok(((3.0 * i as f64 * l).sqrt() + 2.0 * l) / n as f64)
}

/// `|Z_(i) - G^-1(i/n)| <= (4/c) sqrt(log((n^2+n)/delta) / n)` for all `i`.
pub fn quantile_deviation_bound(c: f64, n: usize, delta: f64) -> Result<f64> {
    if !(c > 0.0) {
        return invalid(format!("c must be positive, got {c}"));
    }
    check_delta(delta)?;
    check_n(n)?;
    Ok(4.0 / c * (log_pairs_over_delta(n, delta) / n as f64).sqrt())
}

/// Bound on `|(Z_(i) - Z_(j)) - (G^-1(i/n) - G^-1(j/n))|` for `1 <= i < j <= n`:
/// `(sqrt(3|i-j| l) + 2 l) / (c n) + 4 L |i-j| sqrt(l) / (c^3 n^(3/2))`.
pub fn spacing_deviation_bound(
    c: f64,
    lipschitz: f64,
    n: usize,
    i: usize,
    j: usize,
    delta: f64,
) -> Result<f64> {
    if !(c > 0.0) {
        return invalid(format!("c must be positive, got {c}"));
    }
    if !(lipschitz >= 0.0) {
        return invalid(format!("L must be nonnegative, got {lipschitz}"));
    }
    check_delta(delta)?;
    check_n(n)?;
    if !(1 <= i && i < j && j <= n) {
        return invalid(format!(
            "need 1 <= i < j <= n, got i = {i}, j = {j}, n = {n}"
        ));
    }
    let l = log_pairs_over_delta(n, delta);
    let gap = (j - i) as f64;
    let nf = n as f64;
    Ok(((3.0 * gap * l).sqrt() + 2.0 * l) / (c * nf)
        + 4.0 * lipschitz * gap * l.sqrt() / (c * c * c * nf * nf.sqrt()))
}

/// Whether the joint order-statistic event holds for sorted uniforms
/// `U_(1..=n)`. O(n^2).
pub fn order_stat_pairs_event(sorted_uniforms: &[f64], delta: f64) -> Result<bool> {
    let n = sorted_uniforms.len();
    check_delta(delta)?;
    check_n(n)?;
    let l = log_pairs_over_delta(n, delta);
    let nf = n as f64;
    let u = |k: usize| if k == 0 { 0.0 } else { sorted_uniforms[k - 1] };
    for i in 0..n {
        for j in i + 1..=n {
            let gap = (j - i) as f64;
            let bound = ((3.0 * gap * l).sqrt() + 2.0 * l) / nf;
            if (u(j) - u(i) - gap / nf).abs() > bound {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Whether the marginal order-statistic event holds for sorted uniforms.
pub fn order_stat_marginal_event(sorted_uniforms: &[f64], delta: f64) -> Result<bool> {
    let n = sorted_uniforms.len();
    for (k, u) in sorted_uniforms.iter().enumerate() {
        let i = k + 1;
        if (u - i as f64 / n as f64).abs() > uniform_order_stat_marginal_bound(n, i, delta)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The nonincreasing linear density `g(t) = (1 + s/2) - s t` on `[0, 1]`,
/// `0 <= s < 2`. Lower bound `c = 1 - s/2`, Lipschitz constant `L = s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearDensity {
    slope: f64,
}

impl LinearDensity {
    pub fn new(slope: f64) -> Result<Self> {
        if !(0.0..2.0).contains(&slope) {
            return invalid(format!("slope must lie in [0, 2), got {slope}"));
        }
        Ok(Self { slope })
    }

    pub fn intercept(&self) -> f64 {
        1.0 + 0.5 * self.slope
    }

    pub fn lower_bound(&self) -> f64 {
        1.0 - 0.5 * self.slope
    }

    pub fn lipschitz(&self) -> f64 {
        self.slope
    }

    pub fn density(&self, t: f64) -> f64 {
        self.intercept() - self.slope * t
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.intercept() * t - 0.5 * self.slope * t * t
    }

    /// Closed-form `G^-1(u)`, the root of `a t - s t^2 / 2 = u` in `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let a = self.intercept();
        if self.slope == 0.0 {
            return u;
        }
        // (a - sqrt(a^2 - 2 s u)) / s, rewritten to avoid cancellation near u = 0
        let disc = (a * a - 2.0 * self.slope * u).max(0.0);
        (2.0 * u / (a + disc.sqrt())).min(1.0)
    }
}

/// Visits `n` sorted Uniform(0, 1) order statistics in increasing order,
/// using normalized partial sums of `n + 1` exponential variables.
///
/// The exponential stream is drawn twice from clones of `rng`, so no buffer
/// of size `n` is needed; `rng` is advanced past the draws afterwards.
pub fn for_each_sorted_uniform<R: Rng + Clone>(n: usize, rng: &mut R, mut visit: impl FnMut(f64)) {
    let mut replay = rng.clone();
    let total: f64 = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).sum();
    let mut partial = 0.0;
    for _ in 0..n {
        partial += replay.sample::<f64, _>(Exp1);
        visit((partial / total).min(1.0));
    }
}

/// `n` sorted uniforms collected into a vector.
pub fn sorted_uniforms<R: Rng + Clone>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for_each_sorted_uniform(n, rng, |u| out.push(u));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[f64]) -> SampleSet {
        SampleSet::new(v.to_vec()).unwrap()
    }

    #[test]
    fn sample_set_validation() {
        assert!(SampleSet::new(vec![]).is_err());
        assert!(SampleSet::new(vec![0.5, 1.2]).is_err());
        assert!(SampleSet::new(vec![-0.1]).is_err());
        assert_eq!(set(&[0.8, 0.2]).sorted(), &[0.2, 0.8]);
    }

    #[test]
    fn ecdf_examples() {
        let s = set(&[0.2, 0.8]);
        assert_eq!(empirical_cdf(&s, 0.1).unwrap(), 0.0);
        assert_eq!(empirical_cdf(&s, 0.8).unwrap(), 1.0);
        assert_eq!(empirical_cdf(&s, 0.5).unwrap(), 0.5);
        assert!(empirical_cdf(&s, 1.5).is_err());
    }

    #[test]
    fn grenander_single_point() {
        let g = grenander_fit(&set(&[0.25])).unwrap();
        assert_eq!(g.density_values, vec![4.0]);
        assert_eq!(g.eval(0.1), 4.0);
        assert_eq!(g.eval(0.25), 4.0);
        assert_eq!(g.eval(0.3), 0.0);
    }

    #[test]
    fn grenander_uniform_grid() {
        let n = 20;
        let pts: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let g = grenander_fit(&set(&pts)).unwrap();
        for v in &g.density_values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grenander_three_points() {
        let g = grenander_fit(&set(&[0.1, 0.2, 0.9])).unwrap();
        let expect = [10.0 / 3.0, 10.0 / 3.0, 10.0 / 21.0];
        for (v, e) in g.density_values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
        assert!((g.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(g.pieces().len(), 2);
    }

    #[test]
    fn tied_zero_spacing_is_degenerate() {
        let err = grenander_fit(&set(&[0.0, 0.0, 0.5]));
        assert!(matches!(err, Err(Error::DegenerateSpacings(_))));
        // Interior ties pool with a positive neighbour and are fine.
        assert!(grenander_fit(&set(&[0.3, 0.3, 0.5])).is_ok());
    }

    #[test]
    fn stream_matches_batch_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = LinearDensity::new(1.0).unwrap();
        let pts: Vec<f64> = sorted_uniforms(500, &mut rng)
            .into_iter()
            .map(|u| d.quantile(u))
            .collect();
        let batch = grenander_fit(&set(&pts)).unwrap();
        let mut stream = GrenanderStream::new();
        for &p in &pts {
            stream.push(p).unwrap();
        }
        let pieces = stream.finish().unwrap();
        for p in &pieces {
            let mid = 0.5 * (p.left + p.right);
            assert!((batch.eval(mid) - p.value).abs() < 1e-9 * p.value);
        }
        assert_eq!(pieces.len(), batch.pieces().len());
    }

    #[test]
    fn stream_rejects_unsorted() {
        let mut s = GrenanderStream::new();
        s.push(0.5).unwrap();
        assert!(s.push(0.4).is_err());
        assert!(GrenanderStream::new().finish().is_err());
    }

    #[test]
    fn band_examples() {
        // c = 0.5, L = 1: Delta = 54 cbrt(log((n^2+n)/delta)/n); valid iff Delta < 2/3.
        let b = grenander_band(0.5, 1.0, 100_000, 0.1).unwrap();
        let n = 100_000f64;
        let expect = 54.0 * (((n * n + n) / 0.1).ln() / n).cbrt();
        assert!((b.margin_delta - expect).abs() < 1e-12);
        assert_eq!(b.valid, expect < 2.0 / 3.0);
        assert!(!b.valid);

        let b = grenander_band(1.0, 0.0, 10_000_000, 0.1).unwrap();
        let n = 1e7f64;
        let delta_m = 9.0 * (((n * n + n) / 0.1).ln() / n).cbrt();
        assert!((b.margin_delta - delta_m).abs() < 1e-12);
        assert!(b.valid);
        let hw = b.half_width.unwrap();
        assert!((hw - delta_m / (1.0 - delta_m)).abs() < 1e-12);
    }

    #[test]
    fn band_invalid_cases() {
        let b = grenander_band(1.0, 0.0, 1, 0.5).unwrap();
        assert!(!b.valid);
        assert!(b.half_width.is_none());
        assert!(grenander_band(0.0, 1.0, 10, 0.1).is_err());
        assert!(grenander_band(1.0, 1.0, 10, 1.0).is_err());
    }

    #[test]
    fn order_stat_bound_examples() {
        let l = 110f64.ln();
        // delta -> 1 from below
        let b = uniform_order_stat_bound(10, 0, 5, 1.0 - 1e-15).unwrap();
        assert!((b - ((15.0 * l).sqrt() + 2.0 * l) / 10.0).abs() < 1e-9);
        assert!(uniform_order_stat_bound(10, 5, 5, 0.1).is_err());
        assert!(uniform_order_stat_bound(10, 2, 11, 0.1).is_err());
        let full = uniform_order_stat_bound(10, 0, 10, 0.1).unwrap();
        assert!(full > b);
    }

    #[test]
    fn linear_density_quantile_inverts_cdf() {
        let d = LinearDensity::new(1.0).unwrap();
        assert_eq!(d.intercept(), 1.5);
        assert_eq!(d.lower_bound(), 0.5);
        for k in 0..=100 {
            let t = k as f64 / 100.0;
            assert!((d.quantile(d.cdf(t)) - t).abs() < 1e-12);
        }
        assert!(LinearDensity::new(2.0).is_err());
    }

    #[test]
    fn sup_error_on_step_function() {
        let pieces = [
            DensityPiece {
                left: 0.0,
                right: 0.5,
                value: 1.5,
            },
            DensityPiece {
                left: 0.5,
                right: 0.9,
                value: 0.5,
            },
        ];
        let g = |t: f64| 1.5 - t;
        // On [0.2, 0.6]: first piece |1.5 - 0.2 - 1.5| = 0.2 .. 0.5, second 0.5 .. 0.6 -> |1 - .5|
        let e = sup_abs_error(&pieces, g, 0.2, 0.6);
        assert!((e - 0.5).abs() < 1e-12);
        // The zero tail on (0.9, 1]: g(1) = 0.5.
        let e = sup_abs_error(&pieces, g, 0.95, 1.0);
        assert!((e - 0.55).abs() < 1e-12);
        assert_eq!(sup_abs_error(&pieces, g, 0.6, 0.4), 0.0);
    }
}
