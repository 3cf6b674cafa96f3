use std::io::Write;

use isoband::bands::{
    adaptive_band, backbone_band_from_y, estimate_sigma, theoretical_error_envelope, Band,
    BandTarget, EnvelopeForm, SigmaMethod,
};
use isoband::density::{grenander_band, grenander_fit, LinearDensity, SampleSet};
use isoband::norms::{
    builtin_norm, check_contraction, check_nuna, counterexample_from_violation, nuna_probe_samples,
    random_pairs, ContractionWitness, Counterexample, NunaViolation, BUILTIN_NORMS,
};
use isoband::sim::{
    coverage_shrink_factor, grenander_trial, slope_experiment_observed, trial_seed,
    PiecewiseSignal, SlopeConfig,
};
use isoband::{pava, PsiSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::io::{open_output, read_sequence, read_values, write_json, CliResult, Failure};
use crate::{
    BandArgs, CheckNormArgs, CoverageArgs, DensityArgs, DensitySimArgs, EnvelopeArgs, FitArgs,
    FormArg, Format, PsiChoice, SigmaArgs, SigmaMethodArg, SlopesArgs,
};

fn join(values: &[f64], sep: &str) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

fn sigma_method(m: SigmaMethodArg) -> SigmaMethod {
    match m {
        SigmaMethodArg::Mle => SigmaMethod::Mle,
        SigmaMethodArg::BiasCorrected => SigmaMethod::BiasCorrected,
    }
}

pub fn fit(args: FitArgs) -> CliResult<()> {
    let y = read_sequence(&args.io.input)?;
    let fit = pava(&y);
    let mut out = open_output(args.io.output.as_deref())?;
    match args.io.format {
        Format::Csv => {
            for v in fit.fitted.iter() {
                writeln!(out, "{v}")?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct FitRecord<'a> {
                fitted: &'a [f64],
                blocks: &'a [isoband::iso::Block],
                df: usize,
            }
            write_json(
                &mut out,
                &FitRecord {
                    fitted: &fit.fitted,
                    blocks: &fit.blocks,
                    df: fit.df(),
                },
            )?;
        }
    }
    out.flush()?;
    if let Some(path) = args.blocks {
        let mut b = open_output(Some(&path))?;
        writeln!(b, "start,end,level")?;
        for block in &fit.blocks {
            writeln!(b, "{},{},{}", block.start, block.end, block.level)?;
        }
        b.flush()?;
    }
    eprintln!("df = {}, blocks = {}", fit.df(), fit.blocks.len());
    Ok(())
}

fn read_psi(choice: PsiChoice, file: Option<&std::path::Path>, n: usize) -> CliResult<PsiSpec> {
    match (choice, file) {
        (PsiChoice::Sqrt, None) => Ok(PsiSpec::sqrt(n)),
        (PsiChoice::Const, None) => Ok(PsiSpec::constant(n)),
        (PsiChoice::Custom, Some(path)) => Ok(PsiSpec::new(read_values(path)?)?),
        (PsiChoice::Custom, None) => Err(Failure::input("--psi custom needs --psi-file")),
        (_, Some(_)) => Err(Failure::input("--psi-file is only used with --psi custom")),
    }
}

fn write_band(band: &Band, format: Format, out: &mut dyn Write) -> CliResult<()> {
    match format {
        Format::Csv => {
            writeln!(out, "index,lower,fitted,upper")?;
            for k in 0..band.len() {
                writeln!(
                    out,
                    "{k},{},{},{}",
                    band.lower[k], band.center[k], band.upper[k]
                )?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                index: usize,
                lower: f64,
                fitted: f64,
                upper: f64,
            }
            #[derive(Serialize)]
            struct BandRecord {
                sw_bound: f64,
                sigma: Option<f64>,
                delta: Option<f64>,
                eps_iso: f64,
                target: BandTarget,
                crossings: Vec<usize>,
                rows: Vec<Row>,
            }
            let rows = (0..band.len())
                .map(|k| Row {
                    index: k,
                    lower: band.lower[k],
                    fitted: band.center[k],
                    upper: band.upper[k],
                })
                .collect();
            write_json(
                out,
                &BandRecord {
                    sw_bound: band.sw_bound,
                    sigma: band.sigma,
                    delta: band.delta,
                    eps_iso: band.eps_iso,
                    target: band.target,
                    crossings: band.crossings(),
                    rows,
                },
            )?;
        }
    }
    Ok(())
}

pub fn band(args: BandArgs) -> CliResult<()> {
    let y = read_sequence(&args.io.input)?;
    let band = match args.sw_bound {
        Some(b) => {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(Failure::input(format!(
                    "--sw-bound must be nonnegative, got {b}"
                )));
            }
            if !(args.eps_iso >= 0.0 && args.eps_iso.is_finite()) {
                return Err(Failure::input(format!(
                    "--eps-iso must be nonnegative, got {}",
                    args.eps_iso
                )));
            }
            let psi = read_psi(args.psi, args.psi_file.as_deref(), y.len())?;
            let mut band = backbone_band_from_y(&pava(&y), b, &psi)?;
            if args.eps_iso > 0.0 {
                band.lower.iter_mut().for_each(|v| *v -= args.eps_iso);
                band.upper.iter_mut().for_each(|v| *v += args.eps_iso);
                band.eps_iso = args.eps_iso;
                band.target = BandTarget::Signal;
            }
            band
        }
        None => {
            let delta = args
                .delta
                .ok_or_else(|| Failure::input("--delta is required unless --sw-bound is given"))?;
            let sigma = match args.sigma {
                Some(s) => s,
                None => {
                    let est = estimate_sigma(&y, sigma_method(args.sigma_method), args.c1)?;
                    eprintln!("estimated sigma = {}", est.sigma_hat);
                    est.sigma_hat
                }
            };
            adaptive_band(&y, sigma, delta, args.eps_iso)?
        }
    };
    let crossings = band.crossings();
    if !crossings.is_empty() {
        eprintln!(
            "warning: envelopes cross at {} index(es): {}",
            crossings.len(),
            crossings
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
    }
    let mut out = open_output(args.io.output.as_deref())?;
    write_band(&band, args.io.format, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn envelope(args: EnvelopeArgs) -> CliResult<()> {
    let x = read_sequence(&args.io.input)?;
    let form = match args.form {
        FormArg::Projected => EnvelopeForm::Projected,
        FormArg::Direct => EnvelopeForm::Direct,
    };
    let env = theoretical_error_envelope(&x, args.sigma, args.delta, form)?;
    let mut out = open_output(args.io.output.as_deref())?;
    match args.io.format {
        Format::Csv => {
            writeln!(out, "index,lower,upper")?;
            for k in 0..env.lower.len() {
                writeln!(out, "{k},{},{}", env.lower[k], env.upper[k])?;
            }
        }
        Format::Json => write_json(&mut out, &env)?,
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct NormReport {
    norm: String,
    nuna_passed: bool,
    contraction_passed: bool,
    nuna_violation: Option<NunaViolation>,
    counterexample: Option<Counterexample>,
    contraction_witness: Option<ContractionWitness>,
}

const CHECK_LENGTHS: [usize; 5] = [2, 3, 5, 10, 50];

pub fn check_norm(args: CheckNormArgs) -> CliResult<()> {
    let max_len = *CHECK_LENGTHS.iter().max().expect("nonempty");
    let norm = builtin_norm(&args.norm, max_len).ok_or_else(|| {
        Failure::input(format!(
            "unknown norm {:?}; expected one of {}",
            args.norm,
            BUILTIN_NORMS.join(", ")
        ))
    })?;
    let probes = nuna_probe_samples(args.samples, args.seed);
    let nuna_violation = check_nuna(norm.as_ref(), &probes);
    let counterexample = match &nuna_violation {
        Some(v) => Some(counterexample_from_violation(norm.as_ref(), v)?),
        None => None,
    };
    let mut contraction_witness = counterexample.as_ref().map(|c| c.witness.clone());
    if contraction_witness.is_none() {
        for (k, &n) in CHECK_LENGTHS.iter().enumerate() {
            let pairs = random_pairs(n, args.pairs, trial_seed(args.seed, n, k));
            if let Some(w) = check_contraction(norm.as_ref(), &pairs)? {
                contraction_witness = Some(w);
                break;
            }
        }
    }
    let report = NormReport {
        norm: args.norm.clone(),
        nuna_passed: nuna_violation.is_none(),
        contraction_passed: contraction_witness.is_none(),
        nuna_violation,
        counterexample,
        contraction_witness,
    };

    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Json => write_json(&mut out, &report)?,
        Format::Csv => {
            writeln!(out, "key,value")?;
            writeln!(out, "norm,{}", report.norm)?;
            writeln!(
                out,
                "nuna,{}",
                if report.nuna_passed { "pass" } else { "fail" }
            )?;
            if let Some(v) = &report.nuna_violation {
                writeln!(out, "nuna_x,{}", join(&v.x, ";"))?;
                writeln!(out, "nuna_i,{}", v.i)?;
                writeln!(out, "nuna_before,{}", v.before)?;
                writeln!(out, "nuna_after,{}", v.after)?;
            }
            writeln!(
                out,
                "contraction,{}",
                if report.contraction_passed {
                    "pass"
                } else {
                    "fail"
                }
            )?;
            if let Some(w) = &report.contraction_witness {
                writeln!(out, "witness_y,{}", join(&w.y, ";"))?;
                writeln!(out, "witness_z,{}", join(&w.z, ";"))?;
                writeln!(out, "witness_lhs,{}", w.lhs)?;
                writeln!(out, "witness_rhs,{}", w.rhs)?;
            }
        }
    }
    out.flush()?;
    if report.nuna_passed && report.contraction_passed {
        Ok(())
    } else {
        Err(Failure::violation(format!(
            "norm {} violates {}",
            report.norm,
            if report.nuna_passed {
                "contraction"
            } else {
                "neighbor averaging and contraction"
            }
        )))
    }
}

pub fn density(args: DensityArgs) -> CliResult<()> {
    let samples = SampleSet::new(read_values(&args.io.input)?)?;
    let est = grenander_fit(&samples)?;
    let band = match (args.c, args.lipschitz, args.delta) {
        (Some(c), Some(l), Some(d)) => Some(grenander_band(c, l, samples.len(), d)?),
        _ => None,
    };
    let mut out = open_output(args.io.output.as_deref())?;
    match args.io.format {
        Format::Csv => {
            writeln!(out, "index,z,density")?;
            for (k, v) in est.density_values.iter().enumerate() {
                writeln!(out, "{k},{},{v}", est.breakpoints[k + 1])?;
            }
            if let Some(b) = &band {
                match b.half_width {
                    Some(h) => eprintln!(
                        "band: half-width {h} on [{}, {}]",
                        b.margin_delta,
                        1.0 - b.margin_delta
                    ),
                    None => eprintln!(
                        "band: not valid at this sample size (margin {})",
                        b.margin_delta
                    ),
                }
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct DensityRecord<'a> {
                breakpoints: &'a [f64],
                density_values: &'a [f64],
                band: Option<isoband::density::DensityBand>,
            }
            write_json(
                &mut out,
                &DensityRecord {
                    breakpoints: &est.breakpoints,
                    density_values: &est.density_values,
                    band,
                },
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn simulate_slopes(args: SlopesArgs) -> CliResult<()> {
    let n_values = if args.full_grid {
        (700..=1000).collect()
    } else {
        args.n_values
    };
    let config = SlopeConfig {
        n_values,
        sigma: args.common.sigma,
        delta: args.common.delta,
        trials_per_n: args.trials,
        base_seed: args.common.seed,
    };
    let mut trials_out = match &args.trials_out {
        Some(p) => Some(open_output(Some(p))?),
        None => None,
    };
    let record_error = |e: &dyn std::fmt::Display| {
        isoband::Error::InvalidInput(format!("cannot write trial record: {e}"))
    };
    let exp = slope_experiment_observed(&PiecewiseSignal::default(), &config, |r| {
        if let Some(w) = trials_out.as_mut() {
            serde_json::to_writer(&mut *w, r).map_err(|e| record_error(&e))?;
            writeln!(w).map_err(|e| record_error(&e))?;
        }
        Ok(())
    })?;
    if let Some(mut w) = trials_out {
        w.flush()?;
    }
    let mut out = open_output(args.common.output.as_deref())?;
    match args.common.format {
        Format::Csv => {
            writeln!(out, "n,region,mean_width,coverage")?;
            for s in &exp.summaries {
                writeln!(
                    out,
                    "{},{},{},{}",
                    s.n,
                    s.region.name(),
                    s.mean_width,
                    s.coverage
                )?;
            }
        }
        Format::Json => write_json(&mut out, &exp)?,
    }
    out.flush()?;
    eprintln!(
        "slope (flat) = {}, slope (increasing) = {}",
        exp.flat.slope, exp.increasing.slope
    );
    Ok(())
}

pub fn simulate_coverage(args: CoverageArgs) -> CliResult<()> {
    let table = coverage_shrink_factor(
        &PiecewiseSignal::default(),
        args.n,
        args.common.sigma,
        args.common.delta,
        args.trials,
        &args.factors,
        args.common.seed,
    )?;
    let mut out = open_output(args.common.output.as_deref())?;
    match args.common.format {
        Format::Csv => {
            writeln!(out, "factor,coverage")?;
            for (f, c) in &table {
                writeln!(out, "{f},{c}")?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                factor: f64,
                coverage: f64,
            }
            let rows: Vec<Row> = table
                .iter()
                .map(|&(factor, coverage)| Row { factor, coverage })
                .collect();
            write_json(&mut out, &rows)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn simulate_density(args: DensitySimArgs) -> CliResult<()> {
    let density = LinearDensity::new(args.slope)?;
    let results = (0..args.trials)
        .into_par_iter()
        .map(|t| {
            grenander_trial(
                &density,
                args.n,
                args.delta,
                trial_seed(args.seed, args.n, t),
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Csv => {
            writeln!(out, "trial,seed,margin_delta,half_width,sup_error,covered")?;
            for (t, r) in results.iter().enumerate() {
                let hw = r.half_width.map_or_else(String::new, |h| h.to_string());
                writeln!(
                    out,
                    "{t},{},{},{hw},{},{}",
                    r.seed, r.margin_delta, r.sup_error, r.covered
                )?;
            }
        }
        Format::Json => write_json(&mut out, &results)?,
    }
    out.flush()?;
    Ok(())
}

pub fn sigma(args: SigmaArgs) -> CliResult<()> {
    let y = read_sequence(&args.io.input)?;
    let est = estimate_sigma(&y, sigma_method(args.method), args.c1)?;
    let mut out = open_output(args.io.output.as_deref())?;
    match args.io.format {
        Format::Csv => writeln!(out, "{}", est.sigma_hat)?,
        Format::Json => write_json(&mut out, &est)?,
    }
    out.flush()?;
    Ok(())
}
