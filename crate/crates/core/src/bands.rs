//! Confidence bands for isotonic regression.
//!
//! Everything here rests on one deterministic fact: if `||x - y||_SW <= b`
//! then for every index `k` and every window length `m`,
//!
//! ```text
//! mean(iso(y)[k-m+1..=k]) - b / psi(m)  <=  iso(x)_k  <=  mean(iso(y)[k..k+m]) + b / psi(m)
//! ```
//!
//! ([`backbone_band_from_y`]), and symmetrically with `x` and `y` exchanged
//! ([`backbone_band_from_x`]). Plugging in a high-probability bound on the
//! sliding-window norm of subgaussian noise gives the data-adaptive band
//! ([`adaptive_band`]) and the theoretical error envelope
//! ([`theoretical_error_envelope`]).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::iso::{pava_slice, IsotonicFit, Sequence};
use crate::norms::{check_delta, check_n, check_sigma, log_pairs_over_delta, PsiSpec};

/// Default bias-correction constant for [`SigmaMethod::BiasCorrected`].
///
/// Not calibrated; override when a better constant is known for the data.
pub const DEFAULT_C1: f64 = 1.5;

/// What a [`Band`] is meant to contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandTarget {
    /// `iso(x)`, the projection of the unobserved signal.
    IsoOfSignal,
    /// The signal `x` itself, given an `eps_iso` bound on its non-monotonicity.
    Signal,
    /// `iso(y)`, the projection of the observations, bounded from the signal side.
    IsoOfObservations,
}

/// Per-index lower and upper envelopes around a monotone center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    /// The isotonic fit the band was built from.
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// The bound on the sliding-window distance used to build the band.
    pub sw_bound: f64,
    pub sigma: Option<f64>,
    pub delta: Option<f64>,
    pub eps_iso: f64,
    pub target: BandTarget,
}

impl Band {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| u - l)
            .collect()
    }

    /// Indices where the envelopes cross (`lower > upper`). Crossings are
    /// reported, never clipped.
    pub fn crossings(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&k| self.lower[k] > self.upper[k])
            .collect()
    }

    /// Whether `lower[k] - slack <= v[k] <= upper[k] + slack` for all `k`.
    pub fn contains(&self, v: &[f64], slack: f64) -> bool {
        v.len() == self.len()
            && v.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *l - slack <= *x && *x <= *u + slack)
    }

    /// Rescales both half-widths about the center by `factor`.
    pub fn shrink(&self, factor: f64) -> Band {
        let scale = |bound: &[f64]| -> Vec<f64> {
            bound
                .iter()
                .zip(&self.center)
                .map(|(b, c)| c + factor * (b - c))
                .collect()
        };
        Band {
            lower: scale(&self.lower),
            upper: scale(&self.upper),
            ..self.clone()
        }
    }
}

/// Smallest `eps >= 0` such that `x_i <= x_j + eps` for all `i <= j`. O(n).
pub fn eps_iso(x: &Sequence) -> f64 {
    eps_iso_slice(x)
}

pub(crate) fn eps_iso_slice(x: &[f64]) -> f64 {
    let mut running_max = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for &v in x {
        running_max = running_max.max(v);
        worst = worst.max(running_max - v);
    }
    worst
}

/// `(lower, upper)` with
/// `lower[k] = max_{m} mean(c[k+1-m..=k]) - slack[m]` and
/// `upper[k] = min_{m} mean(c[k..k+m]) + slack[m]`, where `slack[m - 1]` is the
/// allowance for window length `m`. Means are accumulated directly so a
/// length-1 window reproduces `c[k]` exactly.
fn window_envelope(center: &[f64], slack: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = center.len();
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for k in 0..n {
        let mut sum = 0.0;
        let mut best = f64::NEG_INFINITY;
        for m in 1..=k + 1 {
            sum += center[k + 1 - m];
            best = best.max(sum / m as f64 - slack[m - 1]);
        }
        lower[k] = best;

        let mut sum = 0.0;
        let mut best = f64::INFINITY;
        for m in 1..=n - k {
            sum += center[k + m - 1];
            best = best.min(sum / m as f64 + slack[m - 1]);
        }
        upper[k] = best;
    }
    (lower, upper)
}

fn backbone(center: &[f64], sw_bound: f64, psi: &PsiSpec, target: BandTarget) -> Result<Band> {
    if !(sw_bound >= 0.0 && sw_bound.is_finite()) {
        return invalid(format!(
            "sliding-window bound must be nonnegative and finite, got {sw_bound}"
        ));
    }
    psi.require_cover(center.len())?;
    let slack: Vec<f64> = (1..=center.len()).map(|m| sw_bound / psi.at(m)).collect();
    let (lower, upper) = window_envelope(center, &slack);
    Ok(Band {
        center: center.to_vec(),
        lower,
        upper,
        sw_bound,
        sigma: None,
        delta: None,
        eps_iso: 0.0,
        target,
    })
}

/// Bounds `iso(x)` from the observed fit `iso(y)`, given `||x - y||_SW <= sw_bound`.
pub fn backbone_band_from_y(iso_y: &IsotonicFit, sw_bound: f64, psi: &PsiSpec) -> Result<Band> {
    backbone(&iso_y.fitted, sw_bound, psi, BandTarget::IsoOfSignal)
}

/// Bounds `iso(y)` from the signal fit `iso(x)`, given `||x - y||_SW <= sw_bound`.
///
/// Numerically identical to [`backbone_band_from_y`]; only the target differs.
pub fn backbone_band_from_x(iso_x: &IsotonicFit, sw_bound: f64, psi: &PsiSpec) -> Result<Band> {
    backbone(&iso_x.fitted, sw_bound, psi, BandTarget::IsoOfObservations)
}

fn check_eps(eps_iso: f64) -> Result<()> {
    if !(eps_iso >= 0.0 && eps_iso.is_finite()) {
        return invalid(format!(
            "eps_iso must be nonnegative and finite, got {eps_iso}"
        ));
    }
    Ok(())
}

/// Data-adaptive confidence band under subgaussian noise of level `sigma`.
///
/// With probability at least `1 - delta` the band contains `iso(x)`; when
/// `eps_iso > 0` both envelopes are widened by `eps_iso` and the band
/// contains any `eps_iso`-monotone signal `x`.
pub fn adaptive_band(y: &Sequence, sigma: f64, delta: f64, eps_iso: f64) -> Result<Band> {
    check_delta(delta)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return invalid(format!("sigma must be positive and finite, got {sigma}"));
    }
    check_eps(eps_iso)?;
    let fit = pava_slice(y);
    Ok(adaptive_band_from_fit(&fit.fitted, sigma, delta, eps_iso))
}

/// [`adaptive_band`] on a precomputed fit; `sigma = 0` is allowed here.
pub(crate) fn adaptive_band_from_fit(center: &[f64], sigma: f64, delta: f64, eps_iso: f64) -> Band {
    let n = center.len();
    let threshold = sigma * (2.0 * log_pairs_over_delta(n, delta)).sqrt();
    let slack: Vec<f64> = (1..=n).map(|m| threshold / (m as f64).sqrt()).collect();
    let (mut lower, mut upper) = window_envelope(center, &slack);
    if eps_iso > 0.0 {
        lower.iter_mut().for_each(|v| *v -= eps_iso);
        upper.iter_mut().for_each(|v| *v += eps_iso);
    }
    Band {
        center: center.to_vec(),
        lower,
        upper,
        sw_bound: threshold,
        sigma: Some(sigma),
        delta: Some(delta),
        eps_iso,
        target: if eps_iso > 0.0 {
            BandTarget::Signal
        } else {
            BandTarget::IsoOfSignal
        },
    }
}

/// Which form of the theoretical envelope to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeForm {
    /// Bounds `iso(y)_k - iso(x)_k` using windows of `iso(x)`.
    Projected,
    /// Bounds `iso(y)_k - x_k` using windows of `x`, widened by `eps_iso(x)`.
    Direct,
}

/// Per-index deterministic bounds `lower[k] <= iso(y)_k - target_k <= upper[k]`
/// that hold on the `1 - delta` event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope {
    /// Nonpositive lower deviation.
    pub lower: Vec<f64>,
    /// Nonnegative upper deviation.
    pub upper: Vec<f64>,
    pub eps_iso: f64,
    pub form: EnvelopeForm,
}

/// Signal-side error envelope:
///
/// ```text
/// lower[k] = -min_{m <= k+1} { (c_k - mean(c[k+1-m..=k])) + t / sqrt(m) } - eps
/// upper[k] =  min_{m <= n-k} { (mean(c[k..k+m]) - c_k)     + t / sqrt(m) } + eps
/// ```
///
/// with `t = sigma sqrt(2 log((n^2 + n) / delta))`, `c = iso(x)` and `eps = 0`
/// for [`EnvelopeForm::Projected`], or `c = x` and `eps = eps_iso(x)` for
/// [`EnvelopeForm::Direct`].
pub fn theoretical_error_envelope(
    x: &Sequence,
    sigma: f64,
    delta: f64,
    form: EnvelopeForm,
) -> Result<ErrorEnvelope> {
    check_delta(delta)?;
    check_sigma(sigma)?;
    let n = x.len();
    let (center, eps) = match form {
        EnvelopeForm::Projected => (pava_slice(x).fitted.into_vec(), 0.0),
        EnvelopeForm::Direct => (x.to_vec(), eps_iso_slice(x)),
    };
    let threshold = sigma * (2.0 * log_pairs_over_delta(n, delta)).sqrt();
    let slack: Vec<f64> = (1..=n).map(|m| threshold / (m as f64).sqrt()).collect();
    let (lo, up) = window_envelope(&center, &slack);
    let lower = lo.iter().zip(&center).map(|(l, c)| (l - c) - eps).collect();
    let upper = up.iter().zip(&center).map(|(u, c)| (u - c) + eps).collect();
    Ok(ErrorEnvelope {
        lower,
        upper,
        eps_iso: eps,
        form,
    })
}

/// Pointwise error bound for an `L`-Lipschitz monotone signal
/// (`|x_i - x_{i+1}| <= L / n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzWidth {
    /// `min_{1 <= m <= m_max} { L (m - 1) / (2n) + t / sqrt(m) }`
    pub scan_min: f64,
    /// Smallest minimizing window length.
    pub scan_m: usize,
    /// `min(k + 1, n - k)`
    pub m_max: usize,
    /// `2 cbrt(L sigma^2 log((n^2 + n) / delta) / n)`
    pub closed_form: f64,
    /// `ceil((n sqrt(sigma^2 log((n^2 + n) / delta)) / L)^(2/3))`; `None` when `L = 0`.
    pub closed_form_m: Option<usize>,
}

impl LipschitzWidth {
    /// Whether the closed-form window fits inside `[k - m + 1, k + m - 1]`.
    pub fn closed_form_admissible(&self) -> bool {
        self.closed_form_m
            .is_some_and(|m| m >= 1 && m <= self.m_max)
    }
}

pub fn lipschitz_width(
    lipschitz: f64,
    sigma: f64,
    n: usize,
    delta: f64,
    k: usize,
) -> Result<LipschitzWidth> {
    if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
        return invalid(format!("L must be nonnegative and finite, got {lipschitz}"));
    }
    check_sigma(sigma)?;
    check_delta(delta)?;
    check_n(n)?;
    if k >= n {
        return invalid(format!("index {k} out of range for length {n}"));
    }
    let log_term = log_pairs_over_delta(n, delta);
    let threshold = (2.0 * sigma * sigma * log_term).sqrt();
    let nf = n as f64;
    let m_max = (k + 1).min(n - k);
    let mut scan_min = f64::INFINITY;
    let mut scan_m = 1;
    for m in 1..=m_max {
        let v = lipschitz * (m - 1) as f64 / (2.0 * nf) + threshold / (m as f64).sqrt();
        if v < scan_min {
            scan_min = v;
            scan_m = m;
        }
    }
    let closed_form = 2.0 * (lipschitz * sigma * sigma * log_term / nf).cbrt();
    let closed_form_m = if lipschitz > 0.0 {
        let raw = (nf * (sigma * sigma * log_term).sqrt() / lipschitz).powf(2.0 / 3.0);
        Some((raw.ceil() as usize).max(1))
    } else {
        None
    };
    Ok(LipschitzWidth {
        scan_min,
        scan_m,
        m_max,
        closed_form,
        closed_form_m,
    })
}

/// Bound on `E[(1/n) ||iso(y) - iso(x)||_2^2]` for a signal with
/// `V = iso(x)_n - iso(x)_1`:
/// `48 (V sigma^2 log(2n) / n)^(2/3) + 96 sigma^2 log(2n)^2 / n`.
pub fn l2_risk_bound(variation: f64, sigma: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return invalid(format!("the l2 risk bound needs n >= 2, got {n}"));
    }
    if !(variation >= 0.0 && variation.is_finite()) {
        return invalid(format!("V must be nonnegative and finite, got {variation}"));
    }
    check_sigma(sigma)?;
    let nf = n as f64;
    let l = (2.0 * nf).ln();
    let s2 = sigma * sigma;
    Ok(48.0 * (variation * s2 * l / nf).powf(2.0 / 3.0) + 96.0 * s2 * l * l / nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaMethod {
    /// `sigma^2 = RSS / n`
    Mle,
    /// `sigma^2 = RSS / (n - c1 * df)`
    BiasCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEstimate {
    pub sigma_hat: f64,
    pub method: SigmaMethod,
    pub df_used: Option<usize>,
    pub c1: f64,
}

impl NoiseEstimate {
    pub fn variance(&self) -> f64 {
        self.sigma_hat * self.sigma_hat
    }
}

/// Estimates the noise level from the residuals of the isotonic fit.
pub fn estimate_sigma(y: &Sequence, method: SigmaMethod, c1: f64) -> Result<NoiseEstimate> {
    let fit = pava_slice(y);
    let rss = fit.residual_sum_of_squares(y);
    let n = y.len() as f64;
    let df = fit.df();
    let variance = match method {
        SigmaMethod::Mle => rss / n,
        SigmaMethod::BiasCorrected => {
            if !(c1 > 0.0 && c1.is_finite()) {
                return invalid(format!("c1 must be positive and finite, got {c1}"));
            }
            let denom = n - c1 * df as f64;
            if !(denom > 0.0) {
                return Err(Error::DegenerateFit(format!(
                    "n - c1 * df = {n} - {c1} * {df} is not positive"
                )));
            }
            rss / denom
        }
    };
    Ok(NoiseEstimate {
        sigma_hat: variance.sqrt(),
        method,
        df_used: Some(df),
        c1,
    })
}
