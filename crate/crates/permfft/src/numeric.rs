//! Compensated floating-point primitives.
//!
//! The sampler compares FFT-computed dot products against a threshold; values
//! that land inside a small guard band are re-evaluated with these compensated
//! routines so the indicator decision does not depend on FFT rounding.

/// Neumaier variant of Kahan summation.
///
/// Running compensated accumulator; `total()` folds the compensation term in.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated dot product in index order.
pub fn compensated_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = CompensatedSum::new();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.total()
}

/// Compensated dot product of `a` against `b` rotated left by `k`:
/// `sum_j a[j] * b[(j + k) mod n]`.
pub fn compensated_shifted_dot(a: &[f64], b: &[f64], k: usize) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    debug_assert!(k < n);
    let mut acc = CompensatedSum::new();
    for (j, x) in a.iter().enumerate() {
        let idx = j + k;
        let idx = if idx >= n { idx - n } else { idx };
        acc.add(x * b[idx]);
    }
    acc.total()
}

/// Plain (uncompensated) dot product; the honest baseline cost model for the
/// naive Monte Carlo estimator.
pub fn plain_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l2_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sample mean and unbiased sample variance. Variance is 0 for fewer than two
/// values.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mut acc = CompensatedSum::new();
    for &x in xs {
        acc.add(x);
    }
    let mean = acc.total() / xs.len() as f64;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let mut sq = CompensatedSum::new();
    for &x in xs {
        let d = x - mean;
        sq.add(d * d);
    }
    (mean, sq.total() / (xs.len() - 1) as f64)
}
