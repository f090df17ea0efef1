//! Monte Carlo permutation-test p-values in `O(n log n)` per batch.
//!
//! The classical resampling estimate of a permutation p-value draws random
//! permutations one at a time and pays `O(n)` per sample. This crate instead
//! draws a *pair* of random permutations per batch and evaluates the test
//! statistic against all `n` cyclic shifts between them at once using an FFT,
//! so one batch yields `n` correlated-but-nearly-independent indicator samples
//! for the cost of a few length-`n` transforms.
//!
//! The crate is organised in layers:
//!
//! * [`perm`] and [`vector`]: permutations, sample vectors, ranks.
//! * [`rng`]: seeded, splittable random streams so parallel runs are
//!   reproducible regardless of thread count.
//! * [`fft`]: all shifted dot products of two vectors in one pass, with a
//!   guard band that re-evaluates near-threshold values in compensated
//!   arithmetic.
//! * [`estimate`]: the batch estimator, a median-of-means variant, a
//!   conservative estimator that is safe at very small p-values, plus naive
//!   and exact reference estimators and a variance/covariance probe.
//! * [`adapters`]: reductions of common tests (Pearson, Spearman,
//!   Mann-Whitney, Kruskal-Wallis) to the dot-product form.
//! * [`repcheck`]: exact integer verification suites for the combinatorial
//!   facts the sampler's accuracy argument rests on (character bounds,
//!   threshold sets in the factorial lattice).

pub mod adapters;
pub mod error;
pub mod estimate;
pub mod fft;
pub mod numeric;
pub mod perm;
pub mod repcheck;
pub mod rng;
pub mod vector;

pub use error::{Error, Result};
pub use estimate::{AccuracySpec, Method, PValueEstimate};
pub use perm::Permutation;
pub use rng::RngStream;
pub use vector::SampleVector;
