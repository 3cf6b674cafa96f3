//! Monte Carlo experiments: band width scaling and coverage on a piecewise
//! linear monotone signal, and sup-norm error of the Grenander estimator.
//!
//! Every trial draws from its own `ChaCha8Rng` seeded by mixing a base seed
//! with the trial coordinates, so results do not depend on thread count or
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bands::{adaptive_band_from_fit, Band};
use crate::density::{
    for_each_sorted_uniform, grenander_band, sup_abs_error, GrenanderStream, LinearDensity,
};
use crate::error::{invalid, Result};
use crate::iso::{pava_slice, Sequence};
use crate::norms::{check_delta, check_sigma, gaussian_sequence};

/// Slack used when checking that a band contains the signal.
pub const COVERAGE_SLACK: f64 = 1e-12;

/// Continuous piecewise-linear nondecreasing signal on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSignal {
    knots: Vec<(f64, f64)>,
}

impl Default for PiecewiseSignal {
    /// `-10` on `[0, 0.3]`, linear up to `10` on `[0.3, 0.7]`, `10` on `[0.7, 1]`.
    fn default() -> Self {
        Self {
            knots: vec![(0.0, -10.0), (0.3, -10.0), (0.7, 10.0), (1.0, 10.0)],
        }
    }
}

impl PiecewiseSignal {
    /// Knots `(t, value)` with `t` strictly increasing from `0` to `1` and
    /// values nondecreasing.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return invalid("a signal needs at least two knots");
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return invalid("knots must start at t = 0 and end at t = 1");
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return invalid("knots must be finite");
        }
        for w in knots.windows(2) {
            if !(w[0].0 < w[1].0) {
                return invalid(format!(
                    "knot times {} and {} are not increasing",
                    w[0].0, w[1].0
                ));
            }
            if w[0].1 > w[1].1 {
                return invalid(format!(
                    "signal decreases between t = {} and t = {}",
                    w[0].0, w[1].0
                ));
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let k = self.knots.partition_point(|(s, _)| *s < t).max(1);
        let (t0, v0) = self.knots[k - 1];
        let (t1, v1) = self.knots[k];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// `f(1) - f(0)` for a monotone signal.
    pub fn total_variation(&self) -> f64 {
        self.knots[self.knots.len() - 1].1 - self.knots[0].1
    }
}

/// `x_i = f(i / (n + 1))` for `i = 1..=n`.
pub fn sample_signal(signal: &PiecewiseSignal, n: usize) -> Result<Sequence> {
    if n == 0 {
        return invalid("n must be at least 1");
    }
    let step = 1.0 / (n as f64 + 1.0);
    Sequence::new((1..=n).map(|i| signal.eval(i as f64 * step)).collect())
}

/// Parts of `[0, 1]` over which band widths are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `[0.1, 0.2] ∪ [0.8, 0.9]`.
    Flat,
    /// `[0.4, 0.6]`.
    Increasing,
}

impl Region {
    pub const ALL: [Region; 2] = [Region::Flat, Region::Increasing];

    pub fn contains(self, t: f64) -> bool {
        match self {
            Region::Flat => (0.1..=0.2).contains(&t) || (0.8..=0.9).contains(&t),
            Region::Increasing => (0.4..=0.6).contains(&t),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Flat => "flat",
            Region::Increasing => "increasing",
        }
    }

    /// Mean of `widths[i]` over indices whose design point lies in the region.
    pub fn mean_width(self, widths: &[f64]) -> f64 {
        let step = 1.0 / (widths.len() as f64 + 1.0);
        let (sum, count) = widths
            .iter()
            .enumerate()
            .filter(|(i, _)| self.contains((i + 1) as f64 * step))
            .fold((0.0, 0usize), |(s, c), (_, w)| (s + w, c + 1));
        if count == 0 {
            f64::NAN
        } else {
            sum / count as f64
        }
    }
}

/// One noisy draw, its band and how the band relates to the signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub n: usize,
    pub seed: u64,
    pub band: Band,
    pub covered: bool,
    pub mean_width_flat: f64,
    pub mean_width_increasing: f64,
}

/// Draws `y = x + sigma * N(0, I)` from the sampled signal and builds the
/// adaptive band. `sigma = 0` gives `y = x` and a band of zero width.
pub fn run_trial(
    signal: &PiecewiseSignal,
    n: usize,
    sigma: f64,
    delta: f64,
    seed: u64,
) -> Result<TrialResult> {
    check_sigma(sigma)?;
    check_delta(delta)?;
    let x = sample_signal(signal, n)?;
    let band = noisy_band(&x, sigma, delta, seed);
    let widths = band.widths();
    Ok(TrialResult {
        n,
        seed,
        covered: band.contains(&x, COVERAGE_SLACK),
        mean_width_flat: Region::Flat.mean_width(&widths),
        mean_width_increasing: Region::Increasing.mean_width(&widths),
        band,
    })
}

fn noisy_band(x: &[f64], sigma: f64, delta: f64, seed: u64) -> Band {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = gaussian_sequence(&mut rng, x.len());
    let y: Vec<f64> = x
        .iter()
        .zip(noise.iter())
        .map(|(a, e)| a + sigma * e)
        .collect();
    let fit = pava_slice(&y);
    adaptive_band_from_fit(&fit.fitted, sigma, delta, 0.0)
}

/// Seed for trial `trial` at sample size `n`, derived from `base`.
pub fn trial_seed(base: u64, n: usize, trial: usize) -> u64 {
    let mut h = splitmix64(base);
    h = splitmix64(h ^ n as u64);
    splitmix64(h ^ trial as u64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parameters of a width-scaling experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeConfig {
    pub n_values: Vec<usize>,
    pub sigma: f64,
    pub delta: f64,
    pub trials_per_n: usize,
    pub base_seed: u64,
}

/// Averages over the trials at one `n`, for one region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthSummary {
    pub n: usize,
    pub region: Region,
    pub mean_width: f64,
    pub coverage: f64,
}

/// Fitted line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// `log(mean width) = intercept + slope * log(n / log n)` over one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub region: Region,
    pub slope: f64,
    pub intercept: f64,
    pub n_range: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeExperiment {
    pub flat: SlopeReport,
    pub increasing: SlopeReport,
    pub summaries: Vec<WidthSummary>,
}

/// Runs `trials_per_n` trials at each `n` and regresses mean band width on
/// `n / log n` in log-log scale, separately per region. Trials run in
/// parallel on the current rayon pool.
pub fn slope_experiment(signal: &PiecewiseSignal, config: &SlopeConfig) -> Result<SlopeExperiment> {
    slope_experiment_observed(signal, config, |_| Ok(()))
}

/// [`slope_experiment`], handing every trial to `observe` in `(n, trial)`
/// order. Only one `n` worth of trials is held in memory at a time.
pub fn slope_experiment_observed(
    signal: &PiecewiseSignal,
    config: &SlopeConfig,
    mut observe: impl FnMut(&TrialResult) -> Result<()>,
) -> Result<SlopeExperiment> {
    if config.n_values.is_empty() {
        return invalid("n_values is empty");
    }
    if let Some(n) = config.n_values.iter().find(|&&n| n < 100) {
        return invalid(format!("each n must be at least 100, got {n}"));
    }
    if config.trials_per_n == 0 {
        return invalid("trials_per_n must be positive");
    }
    check_sigma(config.sigma)?;
    check_delta(config.delta)?;

    let mut summaries = Vec::with_capacity(2 * config.n_values.len());
    for &n in &config.n_values {
        let results: Vec<TrialResult> = (0..config.trials_per_n)
            .into_par_iter()
            .map(|t| {
                run_trial(
                    signal,
                    n,
                    config.sigma,
                    config.delta,
                    trial_seed(config.base_seed, n, t),
                )
            })
            .collect::<Result<_>>()?;
        for r in &results {
            observe(r)?;
        }
        let trials: Vec<(bool, f64, f64)> = results
            .into_iter()
            .map(|r| (r.covered, r.mean_width_flat, r.mean_width_increasing))
            .collect();
        let count = trials.len() as f64;
        let coverage = trials.iter().filter(|t| t.0).count() as f64 / count;
        let flat = trials.iter().map(|t| t.1).sum::<f64>() / count;
        let increasing = trials.iter().map(|t| t.2).sum::<f64>() / count;
        summaries.push(WidthSummary {
            n,
            region: Region::Flat,
            mean_width: flat,
            coverage,
        });
        summaries.push(WidthSummary {
            n,
            region: Region::Increasing,
            mean_width: increasing,
            coverage,
        });
    }

    let n_range = (
        *config.n_values.iter().min().expect("nonempty"),
        *config.n_values.iter().max().expect("nonempty"),
    );
    let fit_region = |region: Region| -> Result<SlopeReport> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = summaries
            .iter()
            .filter(|s| s.region == region)
            .map(|s| {
                let n = s.n as f64;
                ((n / n.ln()).ln(), s.mean_width.ln())
            })
            .unzip();
        let line = least_squares_line(&xs, &ys)?;
        Ok(SlopeReport {
            region,
            slope: line.slope,
            intercept: line.intercept,
            n_range,
        })
    };
    Ok(SlopeExperiment {
        flat: fit_region(Region::Flat)?,
        increasing: fit_region(Region::Increasing)?,
        summaries,
    })
}

/// Ordinary least squares of `ys` on `xs`. A constant response gives slope 0.
pub fn least_squares_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return invalid("need at least two (x, y) pairs of equal length");
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return invalid("regressor has zero variance; use at least two distinct n");
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// Empirical coverage of the adaptive band with both half-widths scaled by
/// each factor. Returns `(factor, coverage)` in the order given.
pub fn coverage_shrink_factor(
    signal: &PiecewiseSignal,
    n: usize,
    sigma: f64,
    delta: f64,
    trials: usize,
    factors: &[f64],
    base_seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_sigma(sigma)?;
    check_delta(delta)?;
    if trials == 0 {
        return invalid("trials must be positive");
    }
    if let Some(f) = factors.iter().find(|f| !(**f >= 0.0 && f.is_finite())) {
        return invalid(format!("shrink factors must be nonnegative, got {f}"));
    }
    let x = sample_signal(signal, n)?;
    let hits: Vec<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let band = noisy_band(&x, sigma, delta, trial_seed(base_seed, n, t));
            factors
                .iter()
                .map(|&f| band.shrink(f).contains(&x, COVERAGE_SLACK))
                .collect()
        })
        .collect();
    Ok(factors
        .iter()
        .enumerate()
        .map(|(j, &f)| {
            let covered = hits.iter().filter(|h| h[j]).count();
            (f, covered as f64 / trials as f64)
        })
        .collect())
}

/// Outcome of one Grenander Monte Carlo draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrenanderTrial {
    pub n: usize,
    pub seed: u64,
    /// `Delta`; the error is measured on `[Delta, 1 - Delta]`.
    pub margin_delta: f64,
    pub half_width: Option<f64>,
    pub sup_error: f64,
    /// `sup_error <= half_width`; `false` when the band is not valid.
    pub covered: bool,
    pub pieces: usize,
}

/// Draws `n` samples from `density`, fits the Grenander estimator in
/// streaming fashion and measures its exact sup error on `[Delta, 1 - Delta]`.
///
/// Memory does not grow with `n`, so sample sizes in the tens of millions are
/// practical.
pub fn grenander_trial(
    density: &LinearDensity,
    n: usize,
    delta: f64,
    seed: u64,
) -> Result<GrenanderTrial> {
    let band = grenander_band(density.lower_bound(), density.lipschitz(), n, delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stream = GrenanderStream::new();
    let mut failure = None;
    for_each_sorted_uniform(n, &mut rng, |u| {
        if failure.is_none() {
            if let Err(e) = stream.push(density.quantile(u)) {
                failure = Some(e);
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let pieces = stream.finish()?;
    let lo = band.margin_delta;
    let hi = 1.0 - band.margin_delta;
    let sup_error = sup_abs_error(&pieces, |t| density.density(t), lo, hi);
    Ok(GrenanderTrial {
        n,
        seed,
        margin_delta: band.margin_delta,
        half_width: band.half_width,
        sup_error,
        covered: band.half_width.is_some_and(|h| sup_error <= h),
        pieces: pieces.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_signal_shape() {
        let f = PiecewiseSignal::default();
        assert_eq!(f.eval(0.0), -10.0);
        assert_eq!(f.eval(0.3), -10.0);
        assert!((f.eval(0.5) - 0.0).abs() < 1e-12);
        assert_eq!(f.eval(0.7), 10.0);
        assert_eq!(f.eval(1.0), 10.0);
        assert_eq!(f.total_variation(), 20.0);
    }

    #[test]
    fn signal_validation() {
        assert!(PiecewiseSignal::new(vec![(0.0, 1.0), (1.0, 0.0)]).is_err());
        assert!(PiecewiseSignal::new(vec![(0.0, 0.0), (0.5, 1.0)]).is_err());
        assert!(PiecewiseSignal::new(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn single_sample_is_ramp_midpoint() {
        let x = sample_signal(&PiecewiseSignal::default(), 1).unwrap();
        assert!(x[0].abs() < 1e-12);
    }

    #[test]
    fn sampled_signal_is_monotone() {
        let x = sample_signal(&PiecewiseSignal::default(), 99).unwrap();
        assert!(x.windows(2).all(|w| w[0] <= w[1]));
        assert!(sample_signal(&PiecewiseSignal::default(), 0).is_err());
    }

    #[test]
    fn noiseless_trial_has_zero_width() {
        let r = run_trial(&PiecewiseSignal::default(), 100, 0.0, 0.1, 1).unwrap();
        assert!(r.covered);
        assert!(r.band.widths().iter().all(|w| *w == 0.0));
    }

    #[test]
    fn trials_are_reproducible() {
        let f = PiecewiseSignal::default();
        let a = run_trial(&f, 200, 1.0, 0.1, 42).unwrap();
        let b = run_trial(&f, 200, 1.0, 0.1, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(trial_seed(1, 100, 0), trial_seed(1, 100, 1));
        assert_ne!(trial_seed(1, 100, 0), trial_seed(1, 101, 0));
    }

    #[test]
    fn slope_requires_valid_config() {
        let f = PiecewiseSignal::default();
        let mut cfg = SlopeConfig {
            n_values: vec![50],
            sigma: 1.0,
            delta: 0.1,
            trials_per_n: 1,
            base_seed: 0,
        };
        assert!(slope_experiment(&f, &cfg).is_err());
        cfg.n_values = vec![];
        assert!(slope_experiment(&f, &cfg).is_err());
        cfg.n_values = vec![200, 200];
        assert!(slope_experiment(&f, &cfg).is_err());
    }

    #[test]
    fn least_squares_examples() {
        let fit = least_squares_line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        let flat = least_squares_line(&[0.0, 1.0], &[4.0, 4.0]).unwrap();
        assert_eq!(flat.slope, 0.0);
    }

    #[test]
    fn shrink_table_is_monotone() {
        let f = PiecewiseSignal::default();
        let table =
            coverage_shrink_factor(&f, 200, 1.0, 0.1, 20, &[1.0, 0.5, 0.1, 0.0], 9).unwrap();
        assert!(table.windows(2).all(|w| w[0].1 >= w[1].1));
        assert_eq!(table[0].1, 1.0);
    }

    #[test]
    fn grenander_trial_small_n_is_invalid_band() {
        let d = LinearDensity::new(1.0).unwrap();
        let t = grenander_trial(&d, 1000, 0.1, 5).unwrap();
        assert!(t.half_width.is_none());
        assert!(!t.covered);
        assert!(t.pieces >= 1);
    }
}
