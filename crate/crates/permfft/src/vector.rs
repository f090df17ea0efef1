//! Sample vectors and rank transforms.

use crate::error::{Error, Result};

/// A finite real data vector of length at least 2.
///
/// Finiteness and minimum length are checked once at construction so the
/// numeric layers can assume them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    data: Vec<f64>,
}

impl SampleVector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::TooShort {
                len: data.len(),
                min: 2,
            });
        }
        for (index, &value) in data.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
        }
        Ok(Self { data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// True if some value occurs more than once (exact comparison).
    pub fn has_ties(&self) -> bool {
        let mut sorted = self.data.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        sorted.windows(2).any(|w| w[0] == w[1])
    }

    /// True if entries are weakly increasing.
    pub fn is_sorted_ascending(&self) -> bool {
        self.data.windows(2).all(|w| w[0] <= w[1])
    }
}

impl std::ops::Index<usize> for SampleVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

/// Rotate `v` left by `k`: entry `j` of the result is `v[(j + k) mod n]`.
///
/// `k` must satisfy `0 <= k < n`; out-of-range exponents are rejected rather
/// than reduced, since a caller passing one has a bookkeeping bug.
pub fn cyclic_shift_pow(v: &SampleVector, k: usize) -> Result<SampleVector> {
    let n = v.len();
    if k >= n {
        return Err(Error::ShiftOutOfRange { k, n });
    }
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&v.as_slice()[k..]);
    out.extend_from_slice(&v.as_slice()[..k]);
    Ok(SampleVector { data: out })
}

pub(crate) fn from_raw_unchecked(data: Vec<f64>) -> SampleVector {
    debug_assert!(data.len() >= 2 && data.iter().all(|x| x.is_finite()));
    SampleVector { data }
}

/// Midranks: ranks `1..=n` with tied values sharing the average of the ranks
/// they occupy. The rank sum is exactly `n(n+1)/2` (midranks are multiples of
/// one half, which f64 represents exactly for any realistic `n`).
pub fn midranks(v: &SampleVector) -> SampleVector {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));

    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) hold ranks i+1..=j+1; average them
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    SampleVector { data: ranks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            SampleVector::new(vec![1.0]),
            Err(Error::TooShort { len: 1, min: 2 })
        ));
        assert!(matches!(
            SampleVector::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(matches!(
            SampleVector::new(vec![f64::INFINITY, 0.0]),
            Err(Error::NonFinite { index: 0, .. })
        ));
    }

    #[test]
    fn shift_rotates_left() {
        let v = SampleVector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = cyclic_shift_pow(&v, 3).unwrap();
        assert_eq!(s.as_slice(), &[4.0, 1.0, 2.0, 3.0]);
        let back = cyclic_shift_pow(&s, 1).unwrap();
        assert_eq!(back.as_slice(), v.as_slice());
        assert_eq!(cyclic_shift_pow(&v, 0).unwrap().as_slice(), v.as_slice());
        assert!(matches!(
            cyclic_shift_pow(&v, 4),
            Err(Error::ShiftOutOfRange { k: 4, n: 4 })
        ));
    }

    #[test]
    fn midranks_average_ties() {
        let v = SampleVector::new(vec![3.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(midranks(&v).as_slice(), &[3.5, 1.0, 3.5, 2.0]);

        let all_tied = SampleVector::new(vec![5.0, 5.0]).unwrap();
        assert_eq!(midranks(&all_tied).as_slice(), &[1.5, 1.5]);

        let distinct = SampleVector::new(vec![10.0, 20.0, 30.0]).unwrap();
        assert_eq!(midranks(&distinct).as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn midrank_sum_is_exact() {
        // rank sum must be exactly n(n+1)/2 even with heavy ties
        let v = SampleVector::new(vec![2.0, 2.0, 2.0, 1.0, 9.0, 2.0, 9.0]).unwrap();
        let r = midranks(&v);
        let total: f64 = r.as_slice().iter().sum();
        assert_eq!(total, 28.0);
    }

    #[test]
    fn ties_detected_across_signed_zero() {
        let v = SampleVector::new(vec![-0.0, 0.0, 1.0]).unwrap();
        assert!(v.has_ties());
        let r = midranks(&v);
        assert_eq!(r.as_slice(), &[1.5, 1.5, 3.0]);
    }
}
