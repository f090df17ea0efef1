//! Reductions of named tests to the permutation form `Prob(sigma u . v >= t)`.
//!
//! Pearson keeps the raw dot product: the correlation's centering and
//! normalising terms are permutation-invariant, so `sigma x . y >= x . y`
//! defines the same rejection set as `r(sigma x, y) >= r(x, y)`. Spearman is
//! Pearson on midranks. Mann-Whitney uses the rank vector of the pooled
//! sample against a 0/1 group indicator, so the statistic is the rank sum of
//! the second group. Kruskal-Wallis is not a single dot product; it is
//! assembled per shift from one rank-vector correlation per group.
//!
//! All p-values are one-sided (">=") by definition of the permutation test.
//! Rank-based reductions are exact in floating point: midranks are multiples
//! of one half, so rank sums carry no rounding error.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{self, AccuracySpec, Method, PValueEstimate, EXACT_LIMIT};
use crate::fft;
use crate::numeric::{self, CompensatedSum};
use crate::perm::Permutation;
use crate::rng::RngStream;
use crate::vector::{self, midranks, SampleVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestName {
    Pearson,
    Spearman,
    MannWhitney,
    KruskalWallis,
}

impl std::fmt::Display for TestName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TestName::Pearson => "pearson",
            TestName::Spearman => "spearman",
            TestName::MannWhitney => "mann-whitney",
            TestName::KruskalWallis => "kruskal-wallis",
        };
        f.write_str(s)
    }
}

/// A test in canonical permutation form: its p-value is
/// `Prob(sigma u . v >= t)`.
#[derive(Debug, Clone)]
pub struct TestReduction {
    pub u: SampleVector,
    pub v: SampleVector,
    pub t: f64,
    /// Ties were present in the rank-relevant inputs. For rank tests this
    /// means the permutation formula is only approximate (midrank convention);
    /// consumers should surface it.
    pub tie_flag: bool,
    pub test_name: TestName,
}

fn is_constant(v: &SampleVector) -> bool {
    let first = v[0];
    v.as_slice().iter().all(|&x| x == first)
}

/// Pearson correlation test: `u = x`, `v = y`, `t = x . y`.
pub fn pearson_reduction(x: &SampleVector, y: &SampleVector) -> Result<TestReduction> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::TooShort {
            len: x.len(),
            min: 3,
        });
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::Degenerate(
            "correlation undefined for a constant vector".into(),
        ));
    }
    let t = numeric::compensated_dot(x.as_slice(), y.as_slice());
    Ok(TestReduction {
        u: x.clone(),
        v: y.clone(),
        t,
        tie_flag: false,
        test_name: TestName::Pearson,
    })
}

/// Spearman rank correlation test: Pearson on midranks.
pub fn spearman_reduction(x: &SampleVector, y: &SampleVector) -> Result<TestReduction> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::TooShort {
            len: x.len(),
            min: 3,
        });
    }
    let u = midranks(x);
    let v = midranks(y);
    if is_constant(&u) || is_constant(&v) {
        return Err(Error::Degenerate(
            "all values tied; rank correlation undefined".into(),
        ));
    }
    let t = numeric::compensated_dot(u.as_slice(), v.as_slice());
    let tie_flag = x.has_ties() || y.has_ties();
    Ok(TestReduction {
        u,
        v,
        t,
        tie_flag,
        test_name: TestName::Spearman,
    })
}

/// Mann-Whitney one-sided rank-sum test (alternative: second group large).
///
/// `v` = midranks of the pooled sample (first group listed first), `u` = 0 for
/// the first group and 1 for the second, `t` = observed rank sum of the second
/// group. Groups of size one are allowed; the pooled length is at least 2.
pub fn mann_whitney_reduction(xs: &[f64], ys: &[f64]) -> Result<TestReduction> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Degenerate("both groups must be nonempty".into()));
    }
    let mut pooled = Vec::with_capacity(xs.len() + ys.len());
    pooled.extend_from_slice(xs);
    pooled.extend_from_slice(ys);
    let pooled = SampleVector::new(pooled)?;
    let v = midranks(&pooled);
    let tie_flag = pooled.has_ties();
    let mut indicator = vec![0.0; xs.len()];
    indicator.extend(std::iter::repeat(1.0).take(ys.len()));
    let u = SampleVector::new(indicator)?;
    let t = numeric::compensated_dot(u.as_slice(), v.as_slice());
    Ok(TestReduction {
        u,
        v,
        t,
        tie_flag,
        test_name: TestName::MannWhitney,
    })
}

/// One-call wrappers: reduce, then run the dispatching estimator.
pub fn pearson_pvalue(
    x: &SampleVector,
    y: &SampleVector,
    acc: &AccuracySpec,
    rng: &RngStream,
) -> Result<PValueEstimate> {
    let red = pearson_reduction(x, y)?;
    estimate::estimate_pvalue_auto(&red.u, &red.v, red.t, acc, rng)
}

pub fn spearman_pvalue(
    x: &SampleVector,
    y: &SampleVector,
    acc: &AccuracySpec,
    rng: &RngStream,
) -> Result<PValueEstimate> {
    let red = spearman_reduction(x, y)?;
    estimate::estimate_pvalue_auto(&red.u, &red.v, red.t, acc, rng)
}

pub fn mann_whitney_pvalue(
    xs: &[f64],
    ys: &[f64],
    acc: &AccuracySpec,
    rng: &RngStream,
) -> Result<PValueEstimate> {
    let red = mann_whitney_reduction(xs, ys)?;
    estimate::estimate_pvalue_auto(&red.u, &red.v, red.t, acc, rng)
}

/// Observations partitioned into k groups, stored concatenated.
#[derive(Debug, Clone)]
pub struct GroupedSample {
    values: Vec<f64>,
    group_sizes: Vec<usize>,
}

impl GroupedSample {
    pub fn new(values: Vec<f64>, group_sizes: Vec<usize>) -> Result<Self> {
        if group_sizes.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 groups, got {}",
                group_sizes.len()
            )));
        }
        if group_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Degenerate("empty group".into()));
        }
        let total: usize = group_sizes.iter().sum();
        if total != values.len() {
            return Err(Error::InvalidArgument(format!(
                "group sizes sum to {total} but {} values given",
                values.len()
            )));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(Self {
            values,
            group_sizes,
        })
    }

    pub fn from_groups(groups: &[Vec<f64>]) -> Result<Self> {
        let sizes = groups.iter().map(Vec::len).collect();
        let values = groups.concat();
        Self::new(values, sizes)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn n_total(&self) -> usize {
        self.values.len()
    }

    pub fn k(&self) -> usize {
        self.group_sizes.len()
    }
}

/// The observed Kruskal-Wallis state shared by the sampled and exact paths.
#[derive(Debug, Clone)]
pub struct KwObserved {
    /// Midranks of the pooled values, in input order.
    pub ranks: Vec<f64>,
    pub h_observed: f64,
    /// `1 - sum(t^3 - t) / (N^3 - N)`; zero means every value is tied.
    pub tie_correction: f64,
    pub tie_flag: bool,
    /// All observations equal: H is undefined (0/0) and the p-value is 1.
    pub degenerate: bool,
}

/// H from per-group rank sums. Shared by every code path so that equal sums
/// yield bit-identical H values.
fn h_from_sums(sums: &[f64], sizes: &[usize], n_total: usize, tie_correction: f64) -> f64 {
    let nf = n_total as f64;
    let mut acc = CompensatedSum::new();
    for (s, &len) in sums.iter().zip(sizes) {
        acc.add(s * s / len as f64);
    }
    let h_raw = 12.0 / (nf * (nf + 1.0)) * acc.total() - 3.0 * (nf + 1.0);
    h_raw / tie_correction
}

/// Rank the pooled sample and compute the observed statistic.
pub fn kruskal_wallis_observed(g: &GroupedSample) -> Result<KwObserved> {
    let pooled = SampleVector::new(g.values.clone())?;
    let ranks = midranks(&pooled);
    let n = g.n_total();
    let nf = n as f64;

    // tie correction from the sizes of tie groups
    let mut sorted = g.values.clone();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let m = (j - i + 1) as f64;
        tie_term += m * m * m - m;
        i = j + 1;
    }
    let tie_correction = 1.0 - tie_term / (nf * nf * nf - nf);
    let tie_flag = tie_term > 0.0;
    if tie_correction == 0.0 {
        return Ok(KwObserved {
            ranks: ranks.into_vec(),
            h_observed: f64::NAN,
            tie_correction,
            tie_flag,
            degenerate: true,
        });
    }

    let mut sums = Vec::with_capacity(g.k());
    let mut offset = 0;
    for &len in &g.group_sizes {
        let mut acc = CompensatedSum::new();
        for j in offset..offset + len {
            acc.add(ranks[j]);
        }
        sums.push(acc.total());
        offset += len;
    }
    let h_observed = h_from_sums(&sums, &g.group_sizes, n, tie_correction);
    Ok(KwObserved {
        ranks: ranks.into_vec(),
        h_observed,
        tie_correction,
        tie_flag,
        degenerate: false,
    })
}

/// Upper bound on how far FFT rounding can move an assembled H value; shifts
/// whose H lands within this band of the observed H are recomputed exactly.
fn kw_guard_band(obs: &KwObserved, sizes: &[usize], n_total: usize) -> f64 {
    let nf = n_total as f64;
    let rank_norm = numeric::l2_norm(&obs.ranks);
    let s_max = nf * (nf + 1.0) / 2.0;
    let mut worst = 0.0;
    for &len in sizes {
        let e = 1e-9 * (len as f64).sqrt() * rank_norm;
        worst += (2.0 * s_max + e) * e / len as f64;
    }
    12.0 / (nf * (nf + 1.0)) * worst / obs.tie_correction
}

/// Sampled Kruskal-Wallis p-value.
///
/// Each batch draws one permutation pair and recovers, for every cyclic shift,
/// all k group rank sums via one FFT correlation per group; the batch mean is
/// the fraction of shifts whose H reaches the observed H. Costs
/// `O(k n log n)` per batch.
pub fn kruskal_wallis_pvalue(
    g: &GroupedSample,
    acc: &AccuracySpec,
    rng: &RngStream,
) -> Result<PValueEstimate> {
    let n = g.n_total();
    let obs = kruskal_wallis_observed(g)?;
    if obs.degenerate {
        return Ok(PValueEstimate {
            estimate: 1.0,
            batches: 1,
            n,
            seed: rng.seed(),
            empirical_batch_variance: 0.0,
            method: Method::Fft,
        });
    }
    let b = acc.batch_count(n)?;
    let rank_vec = vector::from_raw_unchecked(obs.ranks.clone());
    let indicators: Vec<SampleVector> = {
        let mut out = Vec::with_capacity(g.k());
        let mut offset = 0;
        for &len in g.group_sizes() {
            let mut ind = vec![0.0; n];
            for slot in &mut ind[offset..offset + len] {
                *slot = 1.0;
            }
            out.push(vector::from_raw_unchecked(ind));
            offset += len;
        }
        out
    };
    let guard = kw_guard_band(&obs, g.group_sizes(), n);

    let means: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|i| kw_batch(&rank_vec, &indicators, &obs, g.group_sizes(), guard, &rng.child(i)))
        .collect::<Result<_>>()?;

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

fn kw_batch(
    rank_vec: &SampleVector,
    indicators: &[SampleVector],
    obs: &KwObserved,
    sizes: &[usize],
    guard: f64,
    rng: &RngStream,
) -> Result<f64> {
    let n = rank_vec.len();
    let mut r1 = rng.child(0);
    let mut r2 = rng.child(1);
    let sigma1 = Permutation::uniform(&mut r1, n)?;
    let sigma2 = Permutation::uniform(&mut r2, n)?;

    let permuted_ranks = sigma2.apply(rank_vec)?;
    let permuted_indicators: Vec<SampleVector> = indicators
        .iter()
        .map(|ind| sigma1.apply(ind))
        .collect::<Result<_>>()?;
    let dots: Vec<fft::ShiftDotProducts> = permuted_indicators
        .iter()
        .map(|ind| fft::circulant_dots(ind, &permuted_ranks))
        .collect::<Result<_>>()?;

    let mut sums = vec![0.0; sizes.len()];
    let mut above = 0usize;
    for shift in 0..n {
        for (slot, d) in sums.iter_mut().zip(&dots) {
            *slot = d.values()[shift];
        }
        let mut h = h_from_sums(&sums, sizes, n, obs.tie_correction);
        if (h - obs.h_observed).abs() <= guard {
            for (slot, ind) in sums.iter_mut().zip(&permuted_indicators) {
                *slot = numeric::compensated_shifted_dot(
                    ind.as_slice(),
                    permuted_ranks.as_slice(),
                    shift,
                );
            }
            h = h_from_sums(&sums, sizes, n, obs.tie_correction);
        }
        if h >= obs.h_observed {
            above += 1;
        }
    }
    Ok(above as f64 / n as f64)
}

/// Exact Kruskal-Wallis p-value by enumerating all N! rank arrangements
/// (N <= [`EXACT_LIMIT`]).
pub fn kruskal_wallis_exact(g: &GroupedSample) -> Result<PValueEstimate> {
    let n = g.n_total();
    if n > EXACT_LIMIT {
        return Err(Error::SizeLimit {
            n,
            limit: EXACT_LIMIT,
            what: "exact permutation enumeration",
        });
    }
    let obs = kruskal_wallis_observed(g)?;
    let factorial: u64 = (1..=n as u64).product();
    if obs.degenerate {
        return Ok(PValueEstimate {
            estimate: 1.0,
            batches: factorial,
            n,
            seed: 0,
            empirical_batch_variance: 0.0,
            method: Method::Exact,
        });
    }
    let sizes = g.group_sizes();
    let mut sums = vec![0.0; sizes.len()];
    let mut arrangement = obs.ranks.clone();
    let mut hits = 0u64;

    let mut consider = |w: &[f64]| {
        let mut offset = 0;
        for (slot, &len) in sums.iter_mut().zip(sizes) {
            let mut acc = CompensatedSum::new();
            for &r in &w[offset..offset + len] {
                acc.add(r);
            }
            *slot = acc.total();
            offset += len;
        }
        if h_from_sums(&sums, sizes, n, obs.tie_correction) >= obs.h_observed {
            hits += 1;
        }
    };

    let mut c = vec![0usize; n];
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
    Ok(PValueEstimate {
        estimate: hits as f64 / factorial as f64,
        batches: factorial,
        n,
        seed: 0,
        empirical_batch_variance: 0.0,
        method: Method::Exact,
    })
}
