//! The `bench` subcommand: per-size timing of one FFT batch (n samples)
//! against n plain Monte Carlo draws, on seeded Gaussian data.

use std::time::Instant;

use permfft::estimate;
use permfft::fft;
use permfft::numeric;
use permfft::{RngStream, SampleVector};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::output::{Failure, SCHEMA_VERSION};

#[derive(Debug, Serialize)]
pub struct BenchEntry {
    pub n: usize,
    /// Median wall time of one FFT batch, which scores all n shifts.
    pub fft_batch_ms: f64,
    /// Median wall time of n independent permutation draws.
    pub naive_ms: f64,
    pub speedup: f64,
    /// This size's batch time over the previous size's, when sizes double
    /// this tracks how close the scaling is to linear.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fft_ratio_vs_previous: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub seed: u64,
    pub reps: u32,
    pub entries: Vec<BenchEntry>,
}

pub fn gaussian_vector(rng: &mut RngStream, n: usize) -> SampleVector {
    let data: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    SampleVector::new(data).expect("gaussian draws are finite")
}

fn median_ms(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    samples[samples.len() / 2]
}

pub fn run(sizes: &[usize], seed: u64, reps: u32) -> Result<BenchReport, Failure> {
    if sizes.is_empty() {
        return Err(Failure::config("no sizes to benchmark"));
    }
    if sizes.iter().any(|&n| n < 2) {
        return Err(Failure::config("benchmark sizes must be at least 2"));
    }
    if reps == 0 {
        return Err(Failure::config("reps must be positive"));
    }

    let root = RngStream::new(seed, 0);
    let mut entries: Vec<BenchEntry> = Vec::with_capacity(sizes.len());
    for (idx, &n) in sizes.iter().enumerate() {
        let mut data_rng = root.child(idx as u64);
        let u = gaussian_vector(&mut data_rng, n);
        let v = gaussian_vector(&mut data_rng, n);
        let t = numeric::compensated_dot(u.as_slice(), v.as_slice());

        // warm up the FFT plan for this size before timing
        fft::batch_indicator_mean(&u, &v, t, &root.child(1 << 32 | idx as u64))?;

        let mut fft_times = Vec::with_capacity(reps as usize);
        let mut naive_times = Vec::with_capacity(reps as usize);
        for rep in 0..reps {
            let stream = root.child((2 << 32) | (idx as u64) << 8 | rep as u64);
            let started = Instant::now();
            fft::batch_indicator_mean(&u, &v, t, &stream)?;
            fft_times.push(started.elapsed().as_secs_f64() * 1e3);

            let stream = root.child((3 << 32) | (idx as u64) << 8 | rep as u64);
            let started = Instant::now();
            estimate::naive_mc_pvalue(&u, &v, t, n as u64, &stream)?;
            naive_times.push(started.elapsed().as_secs_f64() * 1e3);
        }
        let fft_batch_ms = median_ms(fft_times);
        let naive_ms = median_ms(naive_times);
        let fft_ratio_vs_previous = entries
            .last()
            .map(|prev: &BenchEntry| fft_batch_ms / prev.fft_batch_ms);
        entries.push(BenchEntry {
            n,
            fft_batch_ms,
            naive_ms,
            speedup: naive_ms / fft_batch_ms,
            fft_ratio_vs_previous,
        });
    }
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        seed,
        reps,
        entries,
    })
}
