//! Python bindings. Sequences cross the boundary as lists of floats; errors
//! surface as `ValueError`.

// Negated float comparisons are deliberate: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use isoband_core::bands::{self, EnvelopeForm, SigmaMethod};
use isoband_core::density;
use isoband_core::norms::{self, builtin_norm};
use isoband_core::sim::{self, PiecewiseSignal};
use isoband_core::{PsiSpec, Sequence};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: isoband_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn seq(values: Vec<f64>) -> PyResult<Sequence> {
    Sequence::new(values).map_err(err)
}

fn psi_or_sqrt(psi: Option<Vec<f64>>, n: usize) -> PyResult<PsiSpec> {
    match psi {
        Some(v) => PsiSpec::new(v).map_err(err),
        None => Ok(PsiSpec::sqrt(n)),
    }
}

/// Result of an isotonic fit.
#[pyclass(frozen, get_all, module = "isoband")]
struct IsotonicFit {
    fitted: Vec<f64>,
    /// `(start, end, level)` with `end` exclusive.
    blocks: Vec<(usize, usize, f64)>,
    df: usize,
}

#[pymethods]
impl IsotonicFit {
    fn __repr__(&self) -> String {
        format!("IsotonicFit(n={}, df={})", self.fitted.len(), self.df)
    }
}

/// Per-index confidence envelopes around an isotonic fit.
#[pyclass(frozen, get_all, module = "isoband")]
struct Band {
    center: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    sw_bound: f64,
    eps_iso: f64,
}

#[pymethods]
impl Band {
    fn widths(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| u - l)
            .collect()
    }

    fn crossings(&self) -> Vec<usize> {
        (0..self.lower.len())
            .filter(|&k| self.lower[k] > self.upper[k])
            .collect()
    }

    /// Whether `lower - slack <= v <= upper + slack` at every index.
    #[pyo3(signature = (v, slack = 1e-12))]
    fn contains(&self, v: Vec<f64>, slack: f64) -> bool {
        v.len() == self.lower.len()
            && v.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (l, u))| *l - slack <= *x && *x <= *u + slack)
    }

    fn __len__(&self) -> usize {
        self.lower.len()
    }
}

impl From<bands::Band> for Band {
    fn from(b: bands::Band) -> Self {
        Band {
            center: b.center,
            lower: b.lower,
            upper: b.upper,
            sw_bound: b.sw_bound,
            eps_iso: b.eps_iso,
        }
    }
}

#[pyfunction]
fn pava(y: Vec<f64>) -> PyResult<IsotonicFit> {
    let fit = isoband_core::pava(&seq(y)?);
    Ok(IsotonicFit {
        df: fit.df(),
        blocks: fit
            .blocks
            .iter()
            .map(|b| (b.start, b.end, b.level))
            .collect(),
        fitted: fit.fitted.into_vec(),
    })
}

#[pyfunction]
fn minmax_iso(y: Vec<f64>, k: usize) -> PyResult<f64> {
    isoband_core::iso::minmax_iso(&seq(y)?, k).map_err(err)
}

/// Sliding-window norm; `psi` defaults to the square root.
#[pyfunction]
#[pyo3(signature = (x, psi = None))]
fn sliding_window_norm(x: Vec<f64>, psi: Option<Vec<f64>>) -> PyResult<f64> {
    let psi = psi_or_sqrt(psi, x.len())?;
    norms::sliding_window_norm(&seq(x)?, &psi).map_err(err)
}

#[pyfunction]
fn eps_iso(x: Vec<f64>) -> PyResult<f64> {
    Ok(bands::eps_iso(&seq(x)?))
}

#[pyfunction]
#[pyo3(signature = (y, sigma, delta, eps_iso = 0.0))]
fn adaptive_band(y: Vec<f64>, sigma: f64, delta: f64, eps_iso: f64) -> PyResult<Band> {
    Ok(bands::adaptive_band(&seq(y)?, sigma, delta, eps_iso)
        .map_err(err)?
        .into())
}

/// Band around `iso(y)` that contains `iso(x)` whenever `||x - y||_SW <= sw_bound`.
#[pyfunction]
#[pyo3(signature = (y, sw_bound, psi = None))]
fn backbone_band(y: Vec<f64>, sw_bound: f64, psi: Option<Vec<f64>>) -> PyResult<Band> {
    let psi = psi_or_sqrt(psi, y.len())?;
    let fit = isoband_core::pava(&seq(y)?);
    Ok(bands::backbone_band_from_y(&fit, sw_bound, &psi)
        .map_err(err)?
        .into())
}

/// `(lower, upper)` envelope for `iso(y) - x`; `form` is "projected" or "direct".
#[pyfunction]
#[pyo3(signature = (x, sigma, delta, form = "projected"))]
fn theoretical_error_envelope(
    x: Vec<f64>,
    sigma: f64,
    delta: f64,
    form: &str,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let form = match form {
        "projected" => EnvelopeForm::Projected,
        "direct" => EnvelopeForm::Direct,
        other => return Err(PyValueError::new_err(format!("unknown form {other:?}"))),
    };
    let env = bands::theoretical_error_envelope(&seq(x)?, sigma, delta, form).map_err(err)?;
    Ok((env.lower, env.upper))
}

/// Noise level from isotonic residuals; `method` is "mle" or "bias_corrected".
#[pyfunction]
#[pyo3(signature = (y, method = "bias_corrected", c1 = bands::DEFAULT_C1))]
fn estimate_sigma(y: Vec<f64>, method: &str, c1: f64) -> PyResult<f64> {
    let method = match method {
        "mle" => SigmaMethod::Mle,
        "bias_corrected" => SigmaMethod::BiasCorrected,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(bands::estimate_sigma(&seq(y)?, method, c1)
        .map_err(err)?
        .sigma_hat)
}

/// `(scan_min, scan_m, closed_form)` pointwise width for an L-Lipschitz signal.
#[pyfunction]
fn lipschitz_width(
    lipschitz: f64,
    sigma: f64,
    n: usize,
    delta: f64,
    k: usize,
) -> PyResult<(f64, usize, f64)> {
    let w = bands::lipschitz_width(lipschitz, sigma, n, delta, k).map_err(err)?;
    Ok((w.scan_min, w.scan_m, w.closed_form))
}

#[pyfunction]
fn l2_risk_bound(variation: f64, sigma: f64, n: usize) -> PyResult<f64> {
    bands::l2_risk_bound(variation, sigma, n).map_err(err)
}

/// `(breakpoints, density_values)` of the Grenander estimate.
#[pyfunction]
fn grenander_fit(points: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = density::SampleSet::new(points).map_err(err)?;
    let g = density::grenander_fit(&s).map_err(err)?;
    Ok((g.breakpoints, g.density_values))
}

/// `(margin_delta, half_width or None, valid)`.
#[pyfunction]
fn grenander_band(
    c: f64,
    lipschitz: f64,
    n: usize,
    delta: f64,
) -> PyResult<(f64, Option<f64>, bool)> {
    let b = density::grenander_band(c, lipschitz, n, delta).map_err(err)?;
    Ok((b.margin_delta, b.half_width, b.valid))
}

/// `(nuna_passed, contraction_passed)` for a built-in norm name.
#[pyfunction]
#[pyo3(signature = (name, seed = 0, samples = 200))]
fn check_norm(name: &str, seed: u64, samples: usize) -> PyResult<(bool, bool)> {
    let norm = builtin_norm(name, 50)
        .ok_or_else(|| PyValueError::new_err(format!("unknown norm {name:?}")))?;
    let probes = norms::nuna_probe_samples(samples, seed);
    if let Some(v) = norms::check_nuna(norm.as_ref(), &probes) {
        let cx = norms::counterexample_from_violation(norm.as_ref(), &v).map_err(err)?;
        return Ok((false, !(cx.witness.lhs > cx.witness.rhs)));
    }
    for n in [2, 3, 5, 10, 50] {
        let pairs = norms::random_pairs(n, samples, seed ^ n as u64);
        if norms::check_contraction(norm.as_ref(), &pairs)
            .map_err(err)?
            .is_some()
        {
            return Ok((true, false));
        }
    }
    Ok((true, true))
}

/// One noisy draw of the default ramp signal: `(covered, mean_width_flat,
/// mean_width_increasing, band)`.
#[pyfunction]
fn run_trial(n: usize, sigma: f64, delta: f64, seed: u64) -> PyResult<(bool, f64, f64, Band)> {
    let r = sim::run_trial(&PiecewiseSignal::default(), n, sigma, delta, seed).map_err(err)?;
    Ok((
        r.covered,
        r.mean_width_flat,
        r.mean_width_increasing,
        r.band.into(),
    ))
}

#[pymodule]
#[pyo3(name = "isoband")]
fn isoband_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<IsotonicFit>()?;
    m.add_class::<Band>()?;
    m.add_function(wrap_pyfunction!(pava, m)?)?;
    m.add_function(wrap_pyfunction!(minmax_iso, m)?)?;
    m.add_function(wrap_pyfunction!(sliding_window_norm, m)?)?;
    m.add_function(wrap_pyfunction!(eps_iso, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_band, m)?)?;
    m.add_function(wrap_pyfunction!(backbone_band, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_error_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(lipschitz_width, m)?)?;
    m.add_function(wrap_pyfunction!(l2_risk_bound, m)?)?;
    m.add_function(wrap_pyfunction!(grenander_fit, m)?)?;
    m.add_function(wrap_pyfunction!(grenander_band, m)?)?;
    m.add_function(wrap_pyfunction!(check_norm, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    Ok(())
}
