//! The `pvalue` subcommand: ingest tabular data, reduce the chosen
//! statistic to dot-product form, run the requested estimator, and emit
//! one JSON record.

use std::path::Path;
use std::time::Instant;

use permfft::adapters::{self, GroupedSample, TestReduction};
use permfft::estimate::{self, AccuracySpec, PValueEstimate, DEFAULT_MAX_BATCHES};
use permfft::{RngStream, SampleVector};

use crate::input;
use crate::output::{Failure, PvalueRecord, SCHEMA_VERSION};
use crate::{MethodArg, StatArg};

pub struct PvalueRequest<'a> {
    pub stat: StatArg,
    pub method: MethodArg,
    pub epsilon: f64,
    pub delta: f64,
    pub c: f64,
    pub seed: u64,
    pub i_max: u64,
    pub repeats: Option<u64>,
    pub input: &'a Path,
    pub columns: (usize, usize),
}

fn accuracy(req: &PvalueRequest) -> Result<AccuracySpec, Failure> {
    Ok(AccuracySpec::new(req.epsilon, req.delta)?.with_constant(req.c)?)
}

/// Sample count for the plain Monte Carlo baseline, chosen so the same
/// `(epsilon, delta, C)` guarantee holds by Chebyshev: `C / (delta eps^2)`.
fn naive_sample_count(req: &PvalueRequest) -> Result<u64, Failure> {
    let acc = accuracy(req)?;
    let m = (acc.constant() / (acc.delta() * acc.epsilon() * acc.epsilon())).ceil();
    let m = if m < 1.0 { 1 } else { m as u64 };
    if m > DEFAULT_MAX_BATCHES {
        return Err(Failure::config(format!(
            "naive sampling would need {} draws, above the cap of {}",
            m, DEFAULT_MAX_BATCHES
        )));
    }
    Ok(m)
}

fn run_dot_form(
    red: &TestReduction,
    req: &PvalueRequest,
    rng: &RngStream,
) -> Result<PValueEstimate, Failure> {
    let est = match req.method {
        MethodArg::Fft => estimate::estimate_pvalue_auto(&red.u, &red.v, red.t, &accuracy(req)?, rng)?,
        MethodArg::FftMedian => {
            let repeats = req
                .repeats
                .unwrap_or_else(|| estimate::median_trick_repeats(req.delta));
            estimate::estimate_pvalue_median(&red.u, &red.v, red.t, &accuracy(req)?, rng, repeats)?
        }
        MethodArg::Naive => {
            estimate::naive_mc_pvalue(&red.u, &red.v, red.t, naive_sample_count(req)?, rng)?
        }
        MethodArg::Exact => estimate::exact_pvalue(&red.u, &red.v, red.t)?,
        MethodArg::Conservative => {
            estimate::conservative_pvalue(&red.u, &red.v, req.i_max, rng)?
        }
    };
    Ok(est)
}

fn sample_vector(data: Vec<f64>) -> Result<SampleVector, Failure> {
    Ok(SampleVector::new(data)?)
}

fn two_groups(long: &input::LongColumns, stat: &str) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    if long.groups.len() != 2 {
        return Err(Failure::degenerate(format!(
            "{} needs exactly 2 groups, found {} ({})",
            stat,
            long.groups.len(),
            long.group_names.join(", ")
        )));
    }
    Ok((long.groups[0].clone(), long.groups[1].clone()))
}

/// Whether the estimate carries the `(epsilon, delta)` guarantee.
fn reports_accuracy(method: MethodArg) -> bool {
    matches!(
        method,
        MethodArg::Fft | MethodArg::FftMedian | MethodArg::Naive
    )
}

pub fn run(req: &PvalueRequest) -> Result<PvalueRecord, Failure> {
    let rng = RngStream::new(req.seed, 0);
    let (est, tie_flag, statistic, wall_time_ms) = match req.stat {
        StatArg::Pearson | StatArg::Spearman => {
            let cols = input::read_paired(req.input, req.columns)?;
            let x = sample_vector(cols.x)?;
            let y = sample_vector(cols.y)?;
            let red = match req.stat {
                StatArg::Pearson => adapters::pearson_reduction(&x, &y)?,
                _ => adapters::spearman_reduction(&x, &y)?,
            };
            let started = Instant::now();
            let est = run_dot_form(&red, req, &rng)?;
            let elapsed = started.elapsed().as_secs_f64() * 1e3;
            (est, red.tie_flag, red.test_name.to_string(), elapsed)
        }
        StatArg::MannWhitney => {
            let long = input::read_long(req.input, req.columns)?;
            let (xs, ys) = two_groups(&long, "mann-whitney")?;
            let red = adapters::mann_whitney_reduction(&xs, &ys)?;
            let started = Instant::now();
            let est = run_dot_form(&red, req, &rng)?;
            let elapsed = started.elapsed().as_secs_f64() * 1e3;
            (est, red.tie_flag, red.test_name.to_string(), elapsed)
        }
        StatArg::KruskalWallis => {
            let long = input::read_long(req.input, req.columns)?;
            if long.groups.len() < 2 {
                return Err(Failure::degenerate(format!(
                    "kruskal-wallis needs at least 2 groups, found {}",
                    long.groups.len()
                )));
            }
            let g = GroupedSample::from_groups(&long.groups)?;
            let obs = adapters::kruskal_wallis_observed(&g)?;
            let started = Instant::now();
            let est = match req.method {
                MethodArg::Fft => adapters::kruskal_wallis_pvalue(&g, &accuracy(req)?, &rng)?,
                MethodArg::Exact => adapters::kruskal_wallis_exact(&g)?,
                other => {
                    return Err(Failure::config(format!(
                        "method {} is not supported for kruskal-wallis; use fft or exact",
                        other.as_str()
                    )))
                }
            };
            let elapsed = started.elapsed().as_secs_f64() * 1e3;
            (est, obs.tie_flag, "kruskal-wallis".to_string(), elapsed)
        }
    };

    let carries_accuracy = reports_accuracy(req.method);
    Ok(PvalueRecord {
        schema_version: SCHEMA_VERSION,
        p_estimate: est.estimate,
        method: est.method.to_string(),
        statistic,
        n: est.n,
        batches: est.batches,
        epsilon: carries_accuracy.then_some(req.epsilon),
        delta: carries_accuracy.then_some(req.delta),
        seed: req.seed,
        empirical_batch_variance: est.empirical_batch_variance,
        tie_flag,
        wall_time_ms,
    })
}
