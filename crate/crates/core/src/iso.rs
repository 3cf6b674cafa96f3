//! Isotonic projection onto the cone `{x : x_0 <= x_1 <= ... <= x_{n-1}}`.
//!
//! [`pava`] is the production path. [`minmax_iso`] and [`slow_projection`]
//! compute the same projection by unrelated routes and exist mainly so the
//! two can be checked against each other.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::window::PrefixSums;

/// A nonempty vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Sequence(Vec<f64>);

impl Sequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("sequence must contain at least one value");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("entry {i} is not finite ({})", values[i]));
        }
        Ok(Self(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Wraps values already known to be finite and nonempty.
    pub(crate) fn from_trusted(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty() && values.iter().all(|v| v.is_finite()));
        Self(values)
    }
}

impl Deref for Sequence {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Sequence {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Sequence> for Vec<f64> {
    fn from(s: Sequence) -> Self {
        s.0
    }
}

/// A maximal constant run `fitted[start..end]` of an isotonic fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub level: f64,
}

impl Block {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// The isotonic projection of a sequence together with its level sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotonicFit {
    pub fitted: Sequence,
    /// Maximal constant runs of `fitted`, in order, with strictly increasing levels.
    pub blocks: Vec<Block>,
}

impl IsotonicFit {
    /// Degrees of freedom: the number of distinct fitted values.
    pub fn df(&self) -> usize {
        self.blocks.len()
    }

    pub fn len(&self) -> usize {
        self.fitted.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn residual_sum_of_squares(&self, y: &[f64]) -> f64 {
        y.iter()
            .zip(self.fitted.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

#[derive(Debug, Clone, Copy)]
struct Pool {
    sum: f64,
    count: usize,
}

impl Pool {
    #[inline]
    fn level(&self) -> f64 {
        self.sum / self.count as f64
    }
}

/// Incremental pool-adjacent-violators state.
///
/// Values are pushed left to right; each push merges trailing pools while the
/// previous pool's mean strictly exceeds the last one. Memory is proportional
/// to the number of pools, not the number of values, which lets long streams
/// (e.g. millions of order-statistic spacings) be projected without storing them.
#[derive(Debug, Clone, Default)]
pub struct PavaStack {
    pools: Vec<Pool>,
    len: usize,
}

impl PavaStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: f64) {
        self.pools.push(Pool {
            sum: value,
            count: 1,
        });
        self.len += 1;
        while self.pools.len() >= 2 {
            let last = self.pools[self.pools.len() - 1];
            let prev = self.pools[self.pools.len() - 2];
            if prev.level() > last.level() {
                self.pools.pop();
                let top = self.pools.last_mut().expect("at least one pool");
                top.sum += last.sum;
                top.count += last.count;
            } else {
                break;
            }
        }
    }

    /// Number of values pushed so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Current pools as `(count, level)` pairs, left to right. Adjacent pools
    /// may share a level; only strict violations are merged.
    pub fn pools(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pools.iter().map(|p| (p.count, p.level()))
    }

    fn into_fit(self) -> IsotonicFit {
        let mut fitted = Vec::with_capacity(self.len);
        for p in &self.pools {
            let level = p.level();
            fitted.extend(std::iter::repeat_n(level, p.count));
        }
        let blocks = constant_runs(&fitted);
        IsotonicFit {
            fitted: Sequence::from_trusted(fitted),
            blocks,
        }
    }
}

/// Maximal runs of exactly equal values.
fn constant_runs(values: &[f64]) -> Vec<Block> {
    let mut blocks: Vec<Block> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match blocks.last_mut() {
            Some(b) if b.level == v => b.end = i + 1,
            _ => blocks.push(Block {
                start: i,
                end: i + 1,
                level: v,
            }),
        }
    }
    blocks
}

/// Least-squares nondecreasing fit by pool adjacent violators, O(n).
pub fn pava(y: &Sequence) -> IsotonicFit {
    pava_slice(y)
}

pub(crate) fn pava_slice(y: &[f64]) -> IsotonicFit {
    let mut stack = PavaStack::new();
    for &v in y {
        stack.push(v);
    }
    stack.into_fit()
}

/// Coordinate `k` of the isotonic projection via
/// `min_{j >= k} max_{i <= k} mean(y[i..=j])`. O(n^2).
pub fn minmax_iso(y: &Sequence, k: usize) -> Result<f64> {
    let n = y.len();
    if k >= n {
        return invalid(format!("index {k} out of range for length {n}"));
    }
    let prefix = PrefixSums::new(y);
    let mut best = f64::INFINITY;
    for j in k..n {
        let inner = (0..=k)
            .map(|i| prefix.mean(i, j + 1))
            .fold(f64::NEG_INFINITY, f64::max);
        best = best.min(inner);
    }
    Ok(best)
}

/// Replaces entries `i` and `i + 1` by their mean.
pub fn neighbor_average(x: &Sequence, i: usize) -> Result<Sequence> {
    let n = x.len();
    if i + 1 >= n {
        return invalid(format!(
            "neighbor index {i} out of range for length {n} (need i + 1 < n)"
        ));
    }
    let mut out = x.to_vec();
    average_pair(&mut out, i);
    Ok(Sequence::from_trusted(out))
}

#[inline]
pub(crate) fn average_pair(x: &mut [f64], i: usize) {
    let m = 0.5 * (x[i] + x[i + 1]);
    x[i] = m;
    x[i + 1] = m;
}

/// Outcome of [`slow_projection`].
#[derive(Debug, Clone, PartialEq)]
pub struct SlowProjection {
    pub iterate: Sequence,
    /// Whether the sup-norm distance to the PAVA fit dropped below the tolerance.
    pub converged: bool,
    /// Number of single-pair steps applied.
    pub steps: usize,
    /// Sup-norm distance from `iterate` to the PAVA fit.
    pub distance: f64,
}

/// Cyclic projection onto the half-spaces `{x_i <= x_{i+1}}`.
///
/// Step `t` (0-based) visits pair `t mod (n - 1)` and averages it only when
/// `x_i > x_{i+1}`. Convergence is checked after each full sweep; the loop
/// stops once the sup-norm distance to `pava(x)` is below `tol` or after
/// `max_sweeps` sweeps.
pub fn slow_projection(x: &Sequence, max_sweeps: usize, tol: f64) -> Result<SlowProjection> {
    let n = x.len();
    if n < 2 {
        return invalid("slow projection needs at least two entries");
    }
    if max_sweeps == 0 {
        return invalid("max_sweeps must be positive");
    }
    if !(tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let target = pava_slice(x);
    let sup_dist = |v: &[f64]| {
        v.iter()
            .zip(target.fitted.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    let mut cur = x.to_vec();
    let mut steps = 0;
    let mut distance = sup_dist(&cur);
    for _ in 0..max_sweeps {
        if distance < tol {
            break;
        }
        for i in 0..n - 1 {
            if cur[i] > cur[i + 1] {
                average_pair(&mut cur, i);
            }
            steps += 1;
        }
        distance = sup_dist(&cur);
    }
    Ok(SlowProjection {
        iterate: Sequence::from_trusted(cur),
        converged: distance < tol,
        steps,
        distance,
    })
}
