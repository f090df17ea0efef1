//! Permutations of `{0..n-1}` and their action on sample vectors.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * `mapping[j] = sigma(j)`.
//! * `apply` places `v[j]` at position `sigma(j)`: `result[sigma(j)] = v[j]`.
//! * `compose(sigma, tau)(j) = sigma(tau(j))`, so
//!   `apply(compose(sigma, tau), v) == apply(sigma, apply(tau, v))`.
//! * `conjugate(sigma, tau) = tau^{-1} . sigma . tau`.
//! * `long_cycle(n)` is the unique-cycle permutation whose powers realise
//!   cyclic shifts: `apply(long_cycle(n).pow(k), v) == cyclic_shift_pow(v, k)`.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::vector::{self, SampleVector};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    /// Validates that `mapping` is a bijection on `{0..n-1}`.
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        if n == 0 {
            return Err(Error::InvalidPermutation {
                reason: "empty mapping".into(),
            });
        }
        let mut seen = vec![false; n];
        for (j, &image) in mapping.iter().enumerate() {
            if image >= n {
                return Err(Error::InvalidPermutation {
                    reason: format!("image {image} of {j} out of range for n={n}"),
                });
            }
            if seen[image] {
                return Err(Error::InvalidPermutation {
                    reason: format!("image {image} repeated"),
                });
            }
            seen[image] = true;
        }
        Ok(Self { mapping })
    }

    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPermutation {
                reason: "empty mapping".into(),
            });
        }
        Ok(Self {
            mapping: (0..n).collect(),
        })
    }

    /// The fixed n-cycle whose k-th power acts on vectors as rotation-left by
    /// k: `long_cycle(n)` maps `j` to `(j + n - 1) mod n`.
    pub fn long_cycle(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPermutation {
                reason: "empty mapping".into(),
            });
        }
        Ok(Self {
            mapping: (0..n).map(|j| (j + n - 1) % n).collect(),
        })
    }

    /// Uniform draw from S_n by Fisher-Yates.
    ///
    /// Consumes exactly `n - 1` RNG words whatever the outcome, so streams
    /// stay aligned across runs that draw different permutations.
    pub fn uniform(rng: &mut RngStream, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidPermutation {
                reason: "cannot sample from S_0".into(),
            });
        }
        let mut mapping: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.index_below(i as u64 + 1) as usize;
            mapping.swap(i, j);
        }
        Ok(Self { mapping })
    }

    pub fn n(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn image(&self, j: usize) -> usize {
        self.mapping[j]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (j, &image) in self.mapping.iter().enumerate() {
            inv[image] = j;
        }
        Permutation { mapping: inv }
    }

    /// `self . other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        let mapping = other.mapping.iter().map(|&j| self.mapping[j]).collect();
        Ok(Permutation { mapping })
    }

    /// `tau^{-1} . self . tau`.
    pub fn conjugate(&self, tau: &Permutation) -> Result<Permutation> {
        if self.n() != tau.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: tau.n(),
            });
        }
        let tau_inv = tau.inverse();
        let mapping = (0..self.n())
            .map(|j| tau_inv.mapping[self.mapping[tau.mapping[j]]])
            .collect();
        Ok(Permutation { mapping })
    }

    /// k-th power by repeated squaring.
    pub fn pow(&self, k: usize) -> Permutation {
        let mut result = Permutation {
            mapping: (0..self.n()).collect(),
        };
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.compose(&base).expect("same n");
            }
            base = base.compose(&base).expect("same n");
            k >>= 1;
        }
        result
    }

    /// Permute a vector: `result[sigma(j)] = v[j]`.
    pub fn apply(&self, v: &SampleVector) -> Result<SampleVector> {
        if self.n() != v.len() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        self.apply_slice(v.as_slice(), &mut out);
        Ok(vector::from_raw_unchecked(out))
    }

    pub(crate) fn apply_slice(&self, src: &[f64], dst: &mut [f64]) {
        debug_assert_eq!(src.len(), self.n());
        debug_assert_eq!(dst.len(), self.n());
        for (j, &image) in self.mapping.iter().enumerate() {
            dst[image] = src[j];
        }
    }

    /// Cycle lengths in weakly decreasing order.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut j = start;
            while !seen[j] {
                seen[j] = true;
                j = self.mapping[j];
                len += 1;
            }
            lengths.push(len);
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        lengths
    }

    pub fn fixed_points(&self) -> usize {
        self.mapping
            .iter()
            .enumerate()
            .filter(|&(j, &image)| j == image)
            .count()
    }

    /// Sign of the permutation: `(-1)^(n - number of cycles)`.
    pub fn parity(&self) -> i32 {
        let cycles = self.cycle_lengths().len();
        if (self.n() - cycles) % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::cyclic_shift_pow;
    use proptest::prelude::*;

    fn sv(data: &[f64]) -> SampleVector {
        SampleVector::new(data.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert!(Permutation::new(vec![1, 0, 2]).is_ok());
    }

    #[test]
    fn apply_places_entries_at_images() {
        let id = Permutation::identity(3).unwrap();
        assert_eq!(id.apply(&sv(&[3.0, 1.0, 2.0])).unwrap().as_slice(), &[3.0, 1.0, 2.0]);

        let swap01 = Permutation::new(vec![1, 0, 2]).unwrap();
        assert_eq!(
            swap01.apply(&sv(&[3.0, 1.0, 2.0])).unwrap().as_slice(),
            &[1.0, 3.0, 2.0]
        );

        let too_short = sv(&[1.0, 2.0]);
        assert!(swap01.apply(&too_short).is_err());
    }

    #[test]
    fn long_cycle_powers_are_rotations() {
        for n in 2..=8usize {
            let lambda = Permutation::long_cycle(n).unwrap();
            assert_eq!(lambda.cycle_lengths(), vec![n]);
            let v = sv(&(0..n).map(|i| (i * i) as f64 + 0.5).collect::<Vec<_>>());
            for k in 0..n {
                let rotated = lambda.pow(k).apply(&v).unwrap();
                assert_eq!(rotated.as_slice(), cyclic_shift_pow(&v, k).unwrap().as_slice());
            }
        }
    }

    #[test]
    fn shift_power_cycle_type_is_rectangular() {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        for n in 1..=12usize {
            let lambda = Permutation::long_cycle(n).unwrap();
            for k in 0..n {
                let a = n / gcd(n, k.max(0));
                let a = if k == 0 { 1 } else { a };
                let expect: Vec<usize> = std::iter::repeat(a).take(n / a).collect();
                assert_eq!(lambda.pow(k).cycle_lengths(), expect, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn conjugation_preserves_cycle_type_and_parity() {
        let mut rng = RngStream::new(7, 0);
        for _ in 0..50 {
            let sigma = Permutation::uniform(&mut rng, 6).unwrap();
            let tau = Permutation::uniform(&mut rng, 6).unwrap();
            let conj = sigma.conjugate(&tau).unwrap();
            assert_eq!(conj.cycle_lengths(), sigma.cycle_lengths());
            assert_eq!(conj.parity(), sigma.parity());
        }
        let id = Permutation::identity(5).unwrap();
        let mut rng = RngStream::new(8, 0);
        let tau = Permutation::uniform(&mut rng, 5).unwrap();
        assert_eq!(id.conjugate(&tau).unwrap(), id);

        let lambda = Permutation::long_cycle(4).unwrap();
        let tau = Permutation::uniform(&mut rng, 4).unwrap();
        assert_eq!(lambda.conjugate(&tau).unwrap().cycle_lengths(), vec![4]);
    }

    #[test]
    fn uniform_is_deterministic_per_stream() {
        let a = Permutation::uniform(&mut RngStream::new(42, 0), 5).unwrap();
        let b = Permutation::uniform(&mut RngStream::new(42, 0), 5).unwrap();
        assert_eq!(a, b);
        assert!(Permutation::uniform(&mut RngStream::new(1, 0), 0).is_err());
        assert_eq!(
            Permutation::uniform(&mut RngStream::new(3, 1), 1).unwrap(),
            Permutation::identity(1).unwrap()
        );
    }

    #[test]
    fn uniform_frequencies_on_s3() {
        let mut rng = RngStream::new(1234, 0);
        let mut counts = std::collections::HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            let p = Permutation::uniform(&mut rng, 3).unwrap();
            *counts.entry(p.mapping().to_vec()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (_, c) in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 6.0).abs() < 0.01, "freq {freq}");
        }
    }

    #[test]
    fn parity_matches_inversion_count() {
        let mut rng = RngStream::new(99, 0);
        for _ in 0..200 {
            let p = Permutation::uniform(&mut rng, 7).unwrap();
            let m = p.mapping();
            let mut inversions = 0usize;
            for i in 0..m.len() {
                for j in i + 1..m.len() {
                    if m[i] > m[j] {
                        inversions += 1;
                    }
                }
            }
            let expect = if inversions % 2 == 0 { 1 } else { -1 };
            assert_eq!(p.parity(), expect);
        }
    }

    proptest! {
        #[test]
        fn composition_law(n in 2usize..8, seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 0);
            let sigma = Permutation::uniform(&mut rng, n).unwrap();
            let tau = Permutation::uniform(&mut rng, n).unwrap();
            let v = SampleVector::new((0..n).map(|i| i as f64 * 1.25 - 2.0).collect()).unwrap();
            let lhs = sigma.compose(&tau).unwrap().apply(&v).unwrap();
            let rhs = sigma.apply(&tau.apply(&v).unwrap()).unwrap();
            prop_assert_eq!(lhs.as_slice(), rhs.as_slice());
        }

        #[test]
        fn parity_is_multiplicative(n in 2usize..=8, seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 1);
            let sigma = Permutation::uniform(&mut rng, n).unwrap();
            let tau = Permutation::uniform(&mut rng, n).unwrap();
            prop_assert_eq!(
                sigma.compose(&tau).unwrap().parity(),
                sigma.parity() * tau.parity()
            );
        }

        #[test]
        fn inverse_composes_to_identity(n in 1usize..10, seed in 0u64..1000) {
            let mut rng = RngStream::new(seed, 2);
            let sigma = Permutation::uniform(&mut rng, n).unwrap();
            let id = Permutation::identity(n).unwrap();
            prop_assert_eq!(sigma.compose(&sigma.inverse()).unwrap(), id);
        }
    }
}
