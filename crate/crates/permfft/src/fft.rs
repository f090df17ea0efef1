//! All shifted dot products of two vectors in one FFT pass, and the batch
//! primitive built on it.
//!
//! For `u, v` of length `n` the circular cross-correlation
//! `y_k = sum_j u[j] * v[(j + k) mod n]` is computed for every `k` at once as
//! `idft(conj(dft(u)) * dft(v))`. The transform length is exactly `n` (the
//! planner handles arbitrary n, primes included); padding to a convenient
//! length would compute a different, non-cyclic quantity and is never done.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::numeric::{self, CompensatedSum};
use crate::perm::Permutation;
use crate::rng::RngStream;
use crate::vector::SampleVector;

/// Per-size transform state: real-input plans plus reusable buffers, so a
/// batch touches no allocator and only half-size spectra.
struct SizeCache {
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    input: Vec<f64>,
    spec_a: Vec<Complex<f64>>,
    spec_b: Vec<Complex<f64>>,
    output: Vec<f64>,
    scratch_fw: Vec<Complex<f64>>,
    scratch_inv: Vec<Complex<f64>>,
}

thread_local! {
    static CACHE: RefCell<HashMap<usize, SizeCache>> = RefCell::new(HashMap::new());
}

fn with_cache<R>(n: usize, f: impl FnOnce(&mut SizeCache) -> R) -> R {
    CACHE.with(|cell| {
        let mut map = cell.borrow_mut();
        let cache = map.entry(n).or_insert_with(|| {
            let mut planner = RealFftPlanner::<f64>::new();
            let r2c = planner.plan_fft_forward(n);
            let c2r = planner.plan_fft_inverse(n);
            SizeCache {
                input: r2c.make_input_vec(),
                spec_a: r2c.make_output_vec(),
                spec_b: r2c.make_output_vec(),
                output: c2r.make_output_vec(),
                scratch_fw: vec![Complex::default(); r2c.get_scratch_len()],
                scratch_inv: vec![Complex::default(); c2r.get_scratch_len()],
                r2c,
                c2r,
            }
        });
        f(cache)
    })
}

/// The n dot products of `u` against all cyclic shifts of `v`.
#[derive(Debug, Clone)]
pub struct ShiftDotProducts {
    values: Vec<f64>,
}

impl ShiftDotProducts {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

/// One batch of the sampler: `n` threshold indicators from a single random
/// permutation pair.
#[derive(Debug, Clone)]
pub struct BatchResult {
    /// Count of shifts k with y_k >= t.
    pub above_count: usize,
    /// `above_count / n`.
    pub mean_indicator: f64,
    /// How many y_k fell inside the guard band and were recomputed exactly.
    pub near_threshold_count: usize,
    /// Stream ids the two permutations were drawn from, for reproducibility
    /// audits.
    pub sigma1_seedpath: u64,
    pub sigma2_seedpath: u64,
}

/// Computes `values[k] = sum_j u[j] * v[(j + k) mod n]` for all k in
/// `O(n log n)`.
pub fn circulant_dots(u: &SampleVector, v: &SampleVector) -> Result<ShiftDotProducts> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(circulant_dots_raw(u.as_slice(), v.as_slice()))
}

fn circulant_dots_raw(u: &[f64], v: &[f64]) -> ShiftDotProducts {
    let n = u.len();
    with_cache(n, |c| {
        c.input.copy_from_slice(u);
        c.r2c
            .process_with_scratch(&mut c.input, &mut c.spec_a, &mut c.scratch_fw)
            .expect("buffer lengths fixed by the plan");
        c.input.copy_from_slice(v);
        c.r2c
            .process_with_scratch(&mut c.input, &mut c.spec_b, &mut c.scratch_fw)
            .expect("buffer lengths fixed by the plan");

        for (a, b) in c.spec_a.iter_mut().zip(&c.spec_b) {
            *a = a.conj() * b;
        }
        // DC (and Nyquist, for even n) bins of a real-real correlation are
        // exactly real; the inverse plan insists on it
        c.spec_a[0].im = 0.0;
        if n % 2 == 0 {
            if let Some(last) = c.spec_a.last_mut() {
                last.im = 0.0;
            }
        }
        c.c2r
            .process_with_scratch(&mut c.spec_a, &mut c.output, &mut c.scratch_inv)
            .expect("buffer lengths fixed by the plan");

        // the inverse is unnormalised
        let scale = 1.0 / n as f64;
        ShiftDotProducts {
            values: c.output.iter().map(|&x| x * scale).collect(),
        }
    })
}

/// Guard band inside which an FFT-computed product is not trusted to decide
/// the indicator: scaled to the data by the product of norms and |t|.
pub fn guard_band(u: &[f64], v: &[f64], t: f64) -> f64 {
    1e-9 * (numeric::l2_norm(u) * numeric::l2_norm(v) + t.abs())
}

/// Count of `y_k >= t` over all shifts, recomputing borderline values in
/// compensated arithmetic. Returns `(count, recomputed)`.
pub(crate) fn guarded_threshold_count(
    a: &[f64],
    b: &[f64],
    t: f64,
    dots: &ShiftDotProducts,
) -> (usize, usize) {
    let band = guard_band(a, b, t);
    let mut above = 0usize;
    let mut recomputed = 0usize;
    for (k, &y) in dots.values.iter().enumerate() {
        let y = if (y - t).abs() <= band {
            recomputed += 1;
            numeric::compensated_shifted_dot(a, b, k)
        } else {
            y
        };
        if y >= t {
            above += 1;
        }
    }
    (above, recomputed)
}

/// One estimator batch: draw `sigma1`, `sigma2` from child streams of `rng`,
/// form `a = sigma1 u` and `b = sigma2 v`, and count how many of the n shifted
/// products `a . (lambda^k b)` reach the threshold.
///
/// Pure in `rng`: the same stream always produces the same batch, so callers
/// parallelise by handing each batch index its own child stream.
pub fn batch_indicator_mean(
    u: &SampleVector,
    v: &SampleVector,
    t: f64,
    rng: &RngStream,
) -> Result<BatchResult> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite { index: 0, value: t });
    }
    let n = u.len();

    let mut r1 = rng.child(0);
    let mut r2 = rng.child(1);
    let sigma1 = Permutation::uniform(&mut r1, n)?;
    let sigma2 = Permutation::uniform(&mut r2, n)?;

    let a = sigma1.apply(u)?;
    let b = sigma2.apply(v)?;

    let dots = circulant_dots_raw(a.as_slice(), b.as_slice());
    let (above, recomputed) = guarded_threshold_count(a.as_slice(), b.as_slice(), t, &dots);

    Ok(BatchResult {
        above_count: above,
        mean_indicator: above as f64 / n as f64,
        near_threshold_count: recomputed,
        sigma1_seedpath: r1.stream_id(),
        sigma2_seedpath: r2.stream_id(),
    })
}

/// Exact threshold count against a precomputed `t` where borderline values for
/// shift `k` are evaluated as `u . (rho^{-1} lambda^k rho) v` in the original
/// index order.
///
/// Used by the conservative estimator: its `k = 0` term must compare the
/// *bitwise identical* sum that defined `t`, which the relabelled order of
/// `compensated_shifted_dot(rho u, rho v, 0)` does not guarantee.
pub(crate) fn guarded_threshold_count_conjugated(
    u: &SampleVector,
    v: &SampleVector,
    rho: &Permutation,
    t: f64,
    dots: &ShiftDotProducts,
) -> (usize, usize) {
    let n = u.len();
    let band = guard_band(u.as_slice(), v.as_slice(), t);
    let rho_v = rho.apply(v).expect("dimensions checked by caller");
    let rho_inv = rho.inverse();
    let mut above = 0usize;
    let mut recomputed = 0usize;
    let mut shifted = vec![0.0; n];
    let mut unpermuted = vec![0.0; n];
    for (k, &y) in dots.values.iter().enumerate() {
        let y = if (y - t).abs() <= band {
            recomputed += 1;
            // alpha^k v with alpha = rho^{-1} lambda rho, then dot with u in
            // index order 0..n-1 (the order that produced t)
            for j in 0..n {
                shifted[j] = rho_v[(j + k) % n];
            }
            rho_inv.apply_slice(&shifted, &mut unpermuted);
            let mut acc = CompensatedSum::new();
            for j in 0..n {
                acc.add(u[j] * unpermuted[j]);
            }
            acc.total()
        } else {
            y
        };
        if y >= t {
            above += 1;
        }
    }
    (above, recomputed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sv(data: &[f64]) -> SampleVector {
        SampleVector::new(data.to_vec()).unwrap()
    }

    fn direct_dots(u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|k| (0..n).map(|j| u[j] * v[(j + k) % n]).sum())
            .collect()
    }

    #[test]
    fn delta_vector_selects_rotations() {
        let got = circulant_dots(&sv(&[1.0, 0.0, 0.0]), &sv(&[5.0, 7.0, 9.0])).unwrap();
        for (a, b) in got.values().iter().zip(&[5.0, 7.0, 9.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_gives_total_everywhere() {
        let got = circulant_dots(&sv(&[1.0, 1.0, 1.0]), &sv(&[5.0, 7.0, 9.0])).unwrap();
        for &y in got.values() {
            assert!((y - 21.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_expansion() {
        let got = circulant_dots(&sv(&[1.0, 2.0]), &sv(&[3.0, 4.0])).unwrap();
        assert!((got.values()[0] - 11.0).abs() < 1e-12);
        assert!((got.values()[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let err = circulant_dots(&sv(&[1.0, 2.0]), &sv(&[1.0, 2.0, 3.0]));
        assert!(matches!(err, Err(Error::DimensionMismatch { left: 2, right: 3 })));
    }

    #[test]
    fn matches_direct_computation_across_lengths() {
        // includes primes, a prime power, and a highly composite length
        let rng = RngStream::new(2024, 0);
        let mut checked = 0;
        for n in 2..=64usize {
            for rep in 0..4 {
                let mut child = rng.child((n * 10 + rep) as u64);
                let u: Vec<f64> = (0..n)
                    .map(|_| (child.next_u64() as f64 / u64::MAX as f64) * 4.0 - 2.0)
                    .collect();
                let v: Vec<f64> = (0..n)
                    .map(|_| (child.next_u64() as f64 / u64::MAX as f64) * 4.0 - 2.0)
                    .collect();
                let fft = circulant_dots(&sv(&u), &sv(&v)).unwrap();
                let direct = direct_dots(&u, &v);
                let tol = 1e-9 * numeric::l2_norm(&u) * numeric::l2_norm(&v);
                for (a, b) in fft.values().iter().zip(&direct) {
                    assert!((a - b).abs() <= tol, "n={n}: {a} vs {b}");
                }
                checked += 1;
            }
        }
        assert!(checked >= 200);
    }

    #[test]
    fn batch_on_zero_vectors() {
        let z = sv(&[0.0, 0.0, 0.0, 0.0]);
        let rng = RngStream::new(5, 0);
        let b = batch_indicator_mean(&z, &z, 0.0, &rng).unwrap();
        assert_eq!(b.mean_indicator, 1.0);
        assert_eq!(b.above_count, 4);
        let b = batch_indicator_mean(&z, &z, 1.0, &rng).unwrap();
        assert_eq!(b.mean_indicator, 0.0);
    }

    #[test]
    fn batch_mean_times_n_is_integral() {
        let u = sv(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let v = sv(&[0.3, -1.0, 2.5, 0.0, 1.1]);
        let root = RngStream::new(11, 0);
        for i in 0..50 {
            let b = batch_indicator_mean(&u, &v, 1.7, &root.child(i)).unwrap();
            let scaled = b.mean_indicator * 5.0;
            assert!((scaled - scaled.round()).abs() < 1e-12);
            assert_eq!(b.above_count as f64, scaled.round());
        }
    }

    #[test]
    fn batch_expectation_converges_to_exact_p() {
        // u = v = (1,2,3), t = 14: exactly one of the 6 permutations reaches
        // 14, so p = 1/6.
        let u = sv(&[1.0, 2.0, 3.0]);
        let root = RngStream::new(31337, 0);
        let batches = 20_000u64;
        let mut total = 0.0;
        for i in 0..batches {
            total += batch_indicator_mean(&u, &u, 14.0, &root.child(i))
                .unwrap()
                .mean_indicator;
        }
        let mean = total / batches as f64;
        assert!((mean - 1.0 / 6.0).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn batch_is_deterministic_in_stream() {
        let u = sv(&[1.0, -2.0, 3.0, 0.5]);
        let v = sv(&[2.0, 0.0, -1.0, 1.0]);
        let rng = RngStream::new(77, 13);
        let a = batch_indicator_mean(&u, &v, 0.2, &rng).unwrap();
        let b = batch_indicator_mean(&u, &v, 0.2, &rng).unwrap();
        assert_eq!(a.above_count, b.above_count);
        assert_eq!(a.sigma1_seedpath, b.sigma1_seedpath);
        assert_eq!(a.sigma2_seedpath, b.sigma2_seedpath);
        assert_ne!(a.sigma1_seedpath, a.sigma2_seedpath);
    }

    #[test]
    fn guard_band_recomputation_decides_ties_correctly() {
        // constant vectors: every shifted product equals the threshold, which
        // the guard band must resolve as ">= t" for all k
        let u = sv(&[1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        let v = sv(&[0.25, 0.5, 0.75, 1.0, 1.25, 1.5]);
        let t = 5.25; // sum of v
        let dots = circulant_dots(&u, &v).unwrap();
        let (above, recomputed) = guarded_threshold_count(u.as_slice(), v.as_slice(), t, &dots);
        assert_eq!(above, 6);
        assert_eq!(recomputed, 6);
    }
}
