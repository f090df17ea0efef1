//! The p-value engines.
//!
//! All estimate the one-sided permutation p-value
//! `p = Prob(sigma u . v >= t)` over uniform `sigma`:
//!
//! * [`estimate_pvalue`]: batched FFT sampler. Each batch costs `O(n log n)`
//!   and yields `n` indicator samples whose pairwise covariance is small, so
//!   `B = ceil(C / (delta n epsilon^2))` batches give
//!   `P(|estimate - p| > epsilon sqrt(p)) <= delta`.
//! * [`estimate_pvalue_median`]: median of independent runs, turning the
//!   linear `1/delta` dependence into `log(1/delta)`.
//! * [`conservative_pvalue`]: never underestimates in distribution; its first
//!   block contains the identity comparison `t >= t`, so the output is at
//!   least `1/(n(i_max+1))` and is safe to report directly as a p-value.
//! * [`naive_mc_pvalue`]: one permutation per sample, plain dot products; the
//!   honest baseline the speedups are measured against.
//! * [`exact_pvalue`]: full enumeration for small `n`; the ground truth the
//!   samplers are tested against.
//! * [`empirical_covariance_probe`]: measures the variance inflation and the
//!   average pairwise covariance of the indicators inside one batch.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::numeric;
use crate::perm::Permutation;
use crate::rng::RngStream;
use crate::vector::SampleVector;

/// Largest n for which exhaustive enumeration is allowed (10! = 3.6M terms).
pub const EXACT_LIMIT: usize = 10;

/// Default variance constant in the batch-count formula. Empirically the
/// within-batch covariances are nonpositive, for which C = 1 already suffices;
/// 2 adds a safety factor.
pub const DEFAULT_VARIANCE_CONSTANT: f64 = 2.0;

/// Default cap on the number of batches a single call may request.
pub const DEFAULT_MAX_BATCHES: u64 = 1 << 26;

/// Below this failure probability the median trick beats the linear-in-1/delta
/// batch formula and the auto dispatcher switches over.
pub const MEDIAN_DELTA_THRESHOLD: f64 = 0.25;

/// Child-stream namespace for median-trick repeat runs; keeps repeat streams
/// disjoint from batch-index streams, which occupy small indices.
const MEDIAN_REPEAT_SALT: u64 = 1 << 63;

/// Namespace for the probe's reference estimate stream.
const PROBE_REFERENCE_SALT: u64 = (1 << 63) + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Fft,
    FftMedian,
    Naive,
    Exact,
    Conservative,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Fft => "fft",
            Method::FftMedian => "fft-median",
            Method::Naive => "naive",
            Method::Exact => "exact",
            Method::Conservative => "conservative",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PValueEstimate {
    pub estimate: f64,
    pub batches: u64,
    pub n: usize,
    pub seed: u64,
    pub empirical_batch_variance: f64,
    pub method: Method,
}

/// Target accuracy for [`estimate_pvalue`]: aim for
/// `P(|estimate - p| > epsilon sqrt(p)) <= delta`.
#[derive(Debug, Clone, Copy)]
pub struct AccuracySpec {
    epsilon: f64,
    delta: f64,
    c: f64,
    max_batches: u64,
}

impl AccuracySpec {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidAccuracy {
                name: "epsilon",
                value: epsilon,
                reason: "must be a positive finite real",
            });
        }
        if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
            return Err(Error::InvalidAccuracy {
                name: "delta",
                value: delta,
                reason: "must lie strictly between 0 and 1",
            });
        }
        Ok(Self {
            epsilon,
            delta,
            c: DEFAULT_VARIANCE_CONSTANT,
            max_batches: DEFAULT_MAX_BATCHES,
        })
    }

    pub fn with_constant(mut self, c: f64) -> Result<Self> {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidAccuracy {
                name: "C",
                value: c,
                reason: "must be a positive finite real",
            });
        }
        self.c = c;
        Ok(self)
    }

    pub fn with_max_batches(mut self, cap: u64) -> Self {
        self.max_batches = cap.max(1);
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// `B = ceil(C / (delta n epsilon^2))`, at least 1, capped.
    pub fn batch_count(&self, n: usize) -> Result<u64> {
        let raw = self.c / (self.delta * n as f64 * self.epsilon * self.epsilon);
        let b = raw.ceil().max(1.0);
        if !b.is_finite() || b > self.max_batches as f64 {
            return Err(Error::BatchCapExceeded {
                requested: if b.is_finite() { b as u64 } else { u64::MAX },
                cap: self.max_batches,
            });
        }
        Ok(b as u64)
    }
}

fn check_pair(u: &SampleVector, v: &SampleVector) -> Result<usize> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(u.len())
}

/// Batched estimator: mean of `B` batch means.
///
/// Batches run in parallel; batch `i` always uses `rng.child(i)`, so the
/// result is identical for any thread count.
pub fn estimate_pvalue(
    u: &SampleVector,
    v: &SampleVector,
    t: f64,
    acc: &AccuracySpec,
    rng: &RngStream,
) -> Result<PValueEstimate> {
    let n = check_pair(u, v)?;
    let b = acc.batch_count(n)?;
    let means = run_batches(u, v, t, b, rng)?;
    let (mean, var) = numeric::mean_and_variance(&means);
    Ok(PValueEstimate {
        estimate: mean,
        batches: b,
        n,
        seed: rng.seed(),
        empirical_batch_variance: var,
        method: Method::Fft,
    })
}

fn run_batches(
    u: &SampleVector,
    v: &SampleVector,
    t: f64,
    b: u64,
    rng: &RngStream,
) -> Result<Vec<f64>> {
    (0..b)
        .into_par_iter()
        .map(|i| fft::batch_indicator_mean(u, v, t, &rng.child(i)).map(|r| r.mean_indicator))
        .collect()
}

/// Number of repeats the median trick needs for failure probability `delta`:
/// smallest odd integer `>= 8 ln(1/delta)`.
pub fn median_trick_repeats(delta: f64) -> u64 {
    let r = (8.0 * (1.0 / delta).ln()).ceil().max(1.0) as u64;
    if r % 2 == 0 {
        r + 1
    } else {
        r
    }
}

/// Median-of-runs wrapper: each run is [`estimate_pvalue`] at internal failure
/// probability 1/4; the median of `repeats` runs fails with probability at
/// most `exp(-repeats/8)`.
///
/// With `repeats = 1` this is exactly `estimate_pvalue` at delta = 1/4 on the
/// given stream. The caller's `acc.delta` does not change the per-run batch
/// count; choose `repeats` from it via [`median_trick_repeats`].
pub fn estimate_pvalue_median(
    u: &SampleVector,
    v: &SampleVector,
    t: f64,
    acc: &AccuracySpec,
    rng: &RngStream,
    repeats: u64,
) -> Result<PValueEstimate> {
    if repeats == 0 || repeats % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "repeats must be odd and positive, got {repeats}"
        )));
    }
    let n = check_pair(u, v)?;
    let inner = AccuracySpec {
        delta: MEDIAN_DELTA_THRESHOLD,
        ..*acc
    };
    let runs: Vec<PValueEstimate> = (0..repeats)
        .map(|r| {
            let stream = if r == 0 {
                rng.clone()
            } else {
                rng.child(MEDIAN_REPEAT_SALT | r)
            };
            estimate_pvalue(u, v, t, &inner, &stream)
        })
        .collect::<Result<_>>()?;

    let mut estimates: Vec<f64> = runs.iter().map(|r| r.estimate).collect();
    estimates.sort_by(f64::total_cmp);
    let median = estimates[estimates.len() / 2];

    let batches = runs.iter().map(|r| r.batches).sum();
    // with one run, fall through to that run's batch-level variance
    let variance = if runs.len() == 1 {
        runs[0].empirical_batch_variance
    } else {
        numeric::mean_and_variance(&estimates).1
    };
    Ok(PValueEstimate {
        estimate: median,
        batches,
        n,
        seed: rng.seed(),
        empirical_batch_variance: variance,
        method: Method::FftMedian,
    })
}

/// Dispatches between the plain estimator and the median trick on the
/// requested `delta`: at `delta >= 1/4` the linear formula is cheaper, below
/// it the median of `median_trick_repeats(delta)` quarter-confidence runs is.
pub fn estimate_pvalue_auto(
    u: &SampleVector,
    v: &SampleVector,
    t: f64,
    acc: &AccuracySpec,
    rng: &RngStream,
) -> Result<PValueEstimate> {
    if acc.delta >= MEDIAN_DELTA_THRESHOLD {
        estimate_pvalue(u, v, t, acc, rng)
    } else {
        estimate_pvalue_median(u, v, t, acc, rng, median_trick_repeats(acc.delta))
    }
}

/// Conservative estimator (safe at small p): sets `t = u . v`, spends one
/// block on the powers of a random conjugate of the long cycle (whose 0-th
/// power contributes the guaranteed comparison `t >= t`), and `i_max` further
/// ordinary batches; returns the average indicator over all `n (i_max + 1)`
/// comparisons.
///
/// Under exchangeable inputs the output is uniform on the grid
/// `{r / (n (i_max+1)) : r = 1..n(i_max+1)}`, hence stochastically no smaller
/// than a uniform p-value.
pub fn conservative_pvalue(
    u: &SampleVector,
    v: &SampleVector,
    i_max: u64,
    rng: &RngStream,
) -> Result<PValueEstimate> {
    let n = check_pair(u, v)?;
    let t = numeric::compensated_dot(u.as_slice(), v.as_slice());

    // block 0: u . alpha^k v for alpha = rho^{-1} lambda rho, computed by
    // relabeling so the FFT kernel applies
    let mut r0 = rng.child(0);
    let rho = Permutation::uniform(&mut r0, n)?;
    let a = rho.apply(u)?;
    let b = rho.apply(v)?;
    let dots = fft::circulant_dots(&a, &b)?;
    let (count0, _) = fft::guarded_threshold_count_conjugated(u, v, &rho, t, &dots);
    debug_assert!(count0 >= 1, "identity power must satisfy t >= t");

    let block_means: Vec<f64> = std::iter::once(Ok(count0 as f64 / n as f64))
        .chain(
            (1..=i_max)
                .into_par_iter()
                .map(|i| fft::batch_indicator_mean(u, v, t, &rng.child(i)).map(|r| r.mean_indicator))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .map(Ok),
        )
        .collect::<Result<_>>()?;

    let total: f64 = block_means.iter().sum();
    let blocks = i_max + 1;
    let (_, variance) = numeric::mean_and_variance(&block_means);
    Ok(PValueEstimate {
        estimate: total / blocks as f64,
        batches: blocks,
        n,
        seed: rng.seed(),
        empirical_batch_variance: variance,
        method: Method::Conservative,
    })
}

/// Baseline estimator: `m` independent permutations, one plain dot product
/// each.
pub fn naive_mc_pvalue(
    u: &SampleVector,
    v: &SampleVector,
    t: f64,
    m: u64,
    rng: &RngStream,
) -> Result<PValueEstimate> {
    let n = check_pair(u, v)?;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite { index: 0, value: t });
    }
    let mut local = rng.clone();
    let mut permuted = vec![0.0; n];
    let mut hits = 0u64;
    for _ in 0..m {
        let sigma = Permutation::uniform(&mut local, n)?;
        sigma.apply_slice(u.as_slice(), &mut permuted);
        if numeric::plain_dot(&permuted, v.as_slice()) >= t {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / m as f64;
    let variance = if m > 1 {
        p_hat * (1.0 - p_hat) * m as f64 / (m - 1) as f64
    } else {
        0.0
    };
    Ok(PValueEstimate {
        estimate: p_hat,
        batches: m,
        n,
        seed: rng.seed(),
        empirical_batch_variance: variance,
        method: Method::Naive,
    })
}

/// Ground truth by enumeration of all n! permutations (n <= [`EXACT_LIMIT`]).
pub fn exact_pvalue(u: &SampleVector, v: &SampleVector, t: f64) -> Result<PValueEstimate> {
    let n = check_pair(u, v)?;
    if n > EXACT_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: EXACT_LIMIT,
            what: "exact permutation enumeration",
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite { index: 0, value: t });
    }
    let mut arrangement: Vec<f64> = u.as_slice().to_vec();
    let v = v.as_slice();
    let mut hits = 0u64;
    let mut total = 0u64;
    // Heap's algorithm: visits each of the n! position-assignments once
    let mut c = vec![0usize; n];
    let mut consider = |w: &[f64]| {
        total += 1;
        if numeric::compensated_dot(w, v) >= t {
            hits += 1;
        }
    };
    consider(&arrangement);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                arrangement.swap(0, i);
            } else {
                arrangement.swap(c[i], i);
            }
            consider(&arrangement);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    let factorial: u64 = (1..=n as u64).product();
    debug_assert_eq!(total, factorial);
    Ok(PValueEstimate {
        estimate: hits as f64 / factorial as f64,
        batches: factorial,
        n,
        seed: 0,
        empirical_batch_variance: 0.0,
        method: Method::Exact,
    })
}

/// What the probe measured, with standard errors so consumers can test
/// hypotheses about the true values.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceProbeReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// p from the exact oracle (small n) or a high-precision naive run.
    pub p_reference: f64,
    pub p_reference_se: f64,
    /// Sample variance of the batch means x_i.
    pub batch_variance: f64,
    pub batch_variance_se: f64,
    /// `n Var(x_i) / (p (1-p))`; equals 1 for independent indicators, 0 when
    /// the batch means do not vary at all.
    pub variance_ratio: f64,
    pub variance_ratio_se: f64,
    /// Average over ordered pairs k != j of Cov(z_k, z_j) within a batch,
    /// recovered from `Var(x_i) = p(1-p)/n + (n-1)/n avg_cov`.
    pub avg_pairwise_covariance: f64,
    pub avg_pairwise_covariance_se: f64,
}

/// Measures the within-batch dependence of the n indicator samples.
///
/// Runs `trials` batches, compares their empirical variance with the
/// independent-sample value `p(1-p)/n`, and solves for the average pairwise
/// covariance. The reference p comes from the exact oracle when n allows,
/// otherwise from a long naive run whose standard error is propagated into
/// the reported uncertainties.
pub fn empirical_covariance_probe(
    u: &SampleVector,
    v: &SampleVector,
    t: f64,
    trials: u64,
    rng: &RngStream,
) -> Result<CovarianceProbeReport> {
    const REFERENCE_SAMPLES: u64 = 200_000;
    let n = check_pair(u, v)?;
    if trials < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 trials to estimate a variance".into(),
        ));
    }

    let (p_ref, p_se) = if n <= EXACT_LIMIT {
        (exact_pvalue(u, v, t)?.estimate, 0.0)
    } else {
        let est = naive_mc_pvalue(u, v, t, REFERENCE_SAMPLES, &rng.child(PROBE_REFERENCE_SALT))?;
        let se = (est.estimate * (1.0 - est.estimate) / REFERENCE_SAMPLES as f64).sqrt();
        (est.estimate, se)
    };

    let means = run_batches(u, v, t, trials, rng)?;
    let (mean, s2) = numeric::mean_and_variance(&means);

    // standard error of the sample variance via the fourth central moment
    let tf = trials as f64;
    let m4 = means.iter().map(|&x| (x - mean).powi(4)).sum::<f64>() / tf;
    let var_of_s2 = ((m4 - s2 * s2 * (tf - 3.0) / (tf - 1.0)) / tf).max(0.0);
    let s2_se = var_of_s2.sqrt();

    let nf = n as f64;
    let pq = p_ref * (1.0 - p_ref);

    let (ratio, ratio_se) = if s2 == 0.0 {
        (0.0, 0.0)
    } else if pq == 0.0 {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let ratio = nf * s2 / pq;
        // propagate both the variance SE and (for naive references) the p SE
        let dp = nf * s2 * (1.0 - 2.0 * p_ref).abs() / (pq * pq) * p_se;
        let dv = nf * s2_se / pq;
        (ratio, (dv * dv + dp * dp).sqrt())
    };

    // Var(x) = pq/n + (n-1)/n avg_cov  =>  avg_cov = (n Var - pq) / (n-1)
    let avg_cov = (nf * s2 - pq) / (nf - 1.0);
    let cov_dp = (1.0 - 2.0 * p_ref).abs() * p_se / (nf - 1.0);
    let cov_dv = nf * s2_se / (nf - 1.0);
    let avg_cov_se = (cov_dv * cov_dv + cov_dp * cov_dp).sqrt();

    Ok(CovarianceProbeReport {
        n,
        trials,
        seed: rng.seed(),
        p_reference: p_ref,
        p_reference_se: p_se,
        batch_variance: s2,
        batch_variance_se: s2_se,
        variance_ratio: ratio,
        variance_ratio_se: ratio_se,
        avg_pairwise_covariance: avg_cov,
        avg_pairwise_covariance_se: avg_cov_se,
    })
}
