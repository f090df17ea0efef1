//! The factorial lattice: Lehmer codes, threshold sets, upper sets, and
//! discrepancy.
//!
//! A permutation is written as the word `(a_1,...,a_n)` with `sigma(a_i) = i`
//! (so the word is the mapping of the inverse permutation), and encoded by
//! `code[i] = #{j < i : a_j < a_i}` with `0 <= code[i] <= i`. Componentwise
//! comparison of codes makes S_n a product of chains; the identity is the top
//! element. The mixed-radix value `sum_i code[i] * i!` ranks codes bijectively
//! into `0..n!`, and a covering step (one coordinate +1) adds exactly `i!` to
//! the rank, which keeps the upward-closure check branch-free.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::perm::Permutation;
use crate::vector::SampleVector;

use super::SN_ENUM_CAP;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LehmerCode {
    code: Vec<usize>,
}

impl LehmerCode {
    pub fn new(code: Vec<usize>) -> Result<Self> {
        if code.is_empty() {
            return Err(Error::InvalidArgument("empty code".into()));
        }
        for (i, &c) in code.iter().enumerate() {
            if c > i {
                return Err(Error::InvalidArgument(format!(
                    "code[{i}] = {c} exceeds position bound {i}"
                )));
            }
        }
        Ok(Self { code })
    }

    pub fn code(&self) -> &[usize] {
        &self.code
    }

    pub fn n(&self) -> usize {
        self.code.len()
    }

    pub fn sum(&self) -> usize {
        self.code.iter().sum()
    }

    /// Mixed-radix rank in `0..n!`.
    pub fn rank(&self) -> u64 {
        let mut rank = 0u64;
        let mut weight = 1u64;
        for (i, &c) in self.code.iter().enumerate() {
            if i > 0 {
                weight *= i as u64;
            }
            rank += c as u64 * weight;
        }
        rank
    }

    pub fn from_rank(mut rank: u64, n: usize) -> Result<Self> {
        let mut code = Vec::with_capacity(n);
        for i in 0..n {
            let radix = (i + 1) as u64;
            code.push((rank % radix) as usize);
            rank /= radix;
        }
        if rank != 0 {
            return Err(Error::InvalidArgument(format!(
                "rank too large for n = {n}"
            )));
        }
        LehmerCode::new(code)
    }
}

/// Word of a permutation: `word[i] = sigma^{-1}(i)`, the letter the writing
/// convention puts at position i.
fn word_of(sigma: &Permutation) -> Vec<usize> {
    sigma.inverse().mapping().to_vec()
}

/// Lehmer code of a permutation under the fixed writing convention.
pub fn lehmer_code(sigma: &Permutation) -> LehmerCode {
    let word = word_of(sigma);
    let code = (0..word.len())
        .map(|i| (0..i).filter(|&j| word[j] < word[i]).count())
        .collect();
    LehmerCode { code }
}

/// Inverse of [`lehmer_code`].
pub fn permutation_from_code(code: &LehmerCode) -> Result<Permutation> {
    let n = code.n();
    // reconstruct the word back to front: at position i the letter is the
    // (code[i])-th smallest value not used by later positions
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut word = vec![0usize; n];
    for i in (0..n).rev() {
        word[i] = remaining.remove(code.code[i]);
    }
    // word[i] = sigma^{-1}(i), so sigma maps word[i] back to i
    let mut mapping = vec![0usize; n];
    for (i, &letter) in word.iter().enumerate() {
        mapping[letter] = i;
    }
    Permutation::new(mapping)
}

/// A subset of S_n stored as a bitmap over code ranks. Capped at n = 8.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermSet {
    n: usize,
    bits: Vec<bool>,
    members: usize,
}

fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

impl PermSet {
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if n > SN_ENUM_CAP {
            return Err(Error::SizeLimit {
                n,
                limit: SN_ENUM_CAP,
                what: "full S_n enumeration",
            });
        }
        Ok(Self {
            n,
            bits: vec![false; factorial_u64(n) as usize],
            members: 0,
        })
    }

    pub fn full(n: usize) -> Result<Self> {
        let mut s = Self::empty(n)?;
        s.bits.iter_mut().for_each(|b| *b = true);
        s.members = s.bits.len();
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    pub fn insert(&mut self, sigma: &Permutation) -> Result<bool> {
        if sigma.n() != self.n {
            return Err(Error::DimensionMismatch {
                left: sigma.n(),
                right: self.n,
            });
        }
        Ok(self.insert_rank(lehmer_code(sigma).rank()))
    }

    pub(crate) fn insert_rank(&mut self, rank: u64) -> bool {
        let slot = &mut self.bits[rank as usize];
        let fresh = !*slot;
        if fresh {
            *slot = true;
            self.members += 1;
        }
        fresh
    }

    pub fn contains(&self, sigma: &Permutation) -> bool {
        sigma.n() == self.n && self.bits[lehmer_code(sigma).rank() as usize]
    }

    pub fn contains_rank(&self, rank: u64) -> bool {
        self.bits[rank as usize]
    }

    pub fn iter_ranks(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(rank, _)| rank as u64)
    }

    pub fn iter_permutations(&self) -> impl Iterator<Item = Permutation> + '_ {
        let n = self.n;
        self.iter_ranks().map(move |rank| {
            permutation_from_code(&LehmerCode::from_rank(rank, n).expect("rank in range"))
                .expect("valid code")
        })
    }
}

/// The set `{sigma : (sigma u) . v >= t}`, enumerated exactly.
///
/// Requires both vectors sorted ascending: that is the hypothesis under which
/// the set is an upper set of the lattice, and the property consumers rely on.
pub fn threshold_set(u: &SampleVector, v: &SampleVector, t: f64) -> Result<PermSet> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    if !u.is_sorted_ascending() || !v.is_sorted_ascending() {
        return Err(Error::InvalidArgument(
            "threshold_set requires both vectors sorted ascending".into(),
        ));
    }
    let n = u.len();
    let mut set = PermSet::empty(n)?;
    let total = factorial_u64(n);
    for rank in 0..total {
        let code = LehmerCode::from_rank(rank, n)?;
        let word = word_from_code(&code);
        // (sigma u) . v = sum_i u[sigma^{-1}(i)] v[i] = sum_i u[word[i]] v[i]
        let mut acc = CompensatedSum::new();
        for (i, &letter) in word.iter().enumerate() {
            acc.add(u[letter] * v[i]);
        }
        if acc.total() >= t {
            set.insert_rank(rank);
        }
    }
    Ok(set)
}

fn word_from_code(code: &LehmerCode) -> Vec<usize> {
    let n = code.n();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut word = vec![0usize; n];
    for i in (0..n).rev() {
        word[i] = remaining.remove(code.code[i]);
    }
    word
}

/// True iff the set is upward closed in the componentwise code order.
///
/// Checks only covering steps (one coordinate +1), which suffices because the
/// order is generated by them.
pub fn is_upper_set(set: &PermSet) -> bool {
    let n = set.n;
    let mut weights = vec![1u64; n];
    for i in 1..n {
        weights[i] = weights[i - 1] * i as u64;
    }
    for rank in set.iter_ranks() {
        let code = LehmerCode::from_rank(rank, n).expect("rank in range");
        for i in 0..n {
            if code.code[i] < i && !set.contains_rank(rank + weights[i]) {
                return false;
            }
        }
    }
    true
}

/// Even-minus-odd count over the set, grading by the parity of the code sum:
/// `sum_{sigma in S} (-1)^(sum code(sigma))`.
///
/// Equals `(-1)^(n(n-1)/2) sum_{sigma in S} parity(sigma)`: the code sum and
/// the inversion count of the word are complementary within `n(n-1)/2`.
pub fn discrepancy(set: &PermSet) -> i64 {
    let n = set.n;
    let mut total = 0i64;
    for rank in set.iter_ranks() {
        let code = LehmerCode::from_rank(rank, n).expect("rank in range");
        if code.sum() % 2 == 0 {
            total += 1;
        } else {
            total -= 1;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn sv(data: &[f64]) -> SampleVector {
        SampleVector::new(data.to_vec()).unwrap()
    }

    #[test]
    fn code_of_identity_and_reversal() {
        let id = Permutation::identity(5).unwrap();
        assert_eq!(lehmer_code(&id).code(), &[0, 1, 2, 3, 4]);

        // word (4,3,2,1,0): no earlier letter is smaller anywhere
        let reversal = Permutation::new(vec![4, 3, 2, 1, 0]).unwrap();
        assert_eq!(lehmer_code(&reversal).code(), &[0, 0, 0, 0, 0]);
    }

    #[test]
    fn code_bounds_and_validation() {
        assert!(LehmerCode::new(vec![]).is_err());
        assert!(LehmerCode::new(vec![0, 2]).is_err());
        assert!(LehmerCode::new(vec![0, 1, 1]).is_ok());
    }

    #[test]
    fn code_roundtrip_is_a_bijection() {
        for n in 1..=6usize {
            let total = factorial_u64(n);
            let mut seen = std::collections::HashSet::new();
            for rank in 0..total {
                let code = LehmerCode::from_rank(rank, n).unwrap();
                assert_eq!(code.rank(), rank);
                let sigma = permutation_from_code(&code).unwrap();
                assert_eq!(lehmer_code(&sigma), code);
                seen.insert(sigma.mapping().to_vec());
            }
            assert_eq!(seen.len(), total as usize);
        }
    }

    #[test]
    fn code_sum_parity_tracks_permutation_sign() {
        // (-1)^(sum code) = (-1)^(n(n-1)/2) parity(sigma), exhaustively
        for n in 1..=6usize {
            let global = if (n * (n - 1) / 2) % 2 == 0 { 1i64 } else { -1 };
            for rank in 0..factorial_u64(n) {
                let code = LehmerCode::from_rank(rank, n).unwrap();
                let sigma = permutation_from_code(&code).unwrap();
                let graded = if code.sum() % 2 == 0 { 1i64 } else { -1 };
                assert_eq!(graded, global * sigma.parity() as i64);
            }
        }
    }

    #[test]
    fn threshold_set_examples() {
        let v = sv(&[1.0, 2.0, 3.0]);
        let top_only = threshold_set(&v, &v, 14.0).unwrap();
        assert_eq!(top_only.len(), 1);
        // the only member is the identity, the top element of the lattice
        let member: Vec<Permutation> = top_only.iter_permutations().collect();
        assert_eq!(member[0], Permutation::identity(3).unwrap());
        assert_eq!(lehmer_code(&member[0]).code(), &[0, 1, 2]);

        assert_eq!(threshold_set(&v, &v, 9.0).unwrap().len(), 6);
        assert_eq!(threshold_set(&v, &v, 15.0).unwrap().len(), 0);
        assert_eq!(threshold_set(&v, &v, 13.0).unwrap().len(), 3);
    }

    #[test]
    fn threshold_set_rejects_unsorted() {
        let sorted = sv(&[1.0, 2.0, 3.0]);
        let unsorted = sv(&[2.0, 1.0, 3.0]);
        assert!(threshold_set(&unsorted, &sorted, 0.0).is_err());
        assert!(threshold_set(&sorted, &unsorted, 0.0).is_err());
        // weakly increasing is allowed
        let tied = sv(&[1.0, 1.0, 2.0]);
        assert!(threshold_set(&tied, &sorted, 0.0).is_ok());
    }

    #[test]
    fn empty_full_and_top_are_upper_sets() {
        assert!(is_upper_set(&PermSet::empty(4).unwrap()));
        assert!(is_upper_set(&PermSet::full(4).unwrap()));
        let mut top = PermSet::empty(4).unwrap();
        top.insert(&Permutation::identity(4).unwrap()).unwrap();
        assert!(is_upper_set(&top));
        // the bottom element alone is not upward closed (n >= 2)
        let mut bottom = PermSet::empty(4).unwrap();
        bottom
            .insert(&Permutation::new(vec![3, 2, 1, 0]).unwrap())
            .unwrap();
        assert!(!is_upper_set(&bottom));
    }

    #[test]
    fn threshold_sets_are_upper_sets() {
        let mut rng = RngStream::new(505, 0);
        for trial in 0..100 {
            let n = 3 + (trial % 4);
            let mut raw: Vec<f64> = (0..n)
                .map(|_| rng.next_u64() as f64 / u64::MAX as f64 * 10.0 - 5.0)
                .collect();
            raw.sort_by(f64::total_cmp);
            let u = sv(&raw);
            let mut raw: Vec<f64> = (0..n)
                .map(|_| rng.next_u64() as f64 / u64::MAX as f64 * 10.0 - 5.0)
                .collect();
            raw.sort_by(f64::total_cmp);
            let v = sv(&raw);
            let span: f64 = raw.iter().map(|x| x.abs()).sum::<f64>() * 5.0;
            let t = (rng.next_u64() as f64 / u64::MAX as f64) * 2.0 * span - span;
            let set = threshold_set(&u, &v, t).unwrap();
            assert!(is_upper_set(&set), "trial {trial}: not an upper set");
        }
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(discrepancy(&PermSet::full(3).unwrap()), 0);

        let mut top = PermSet::empty(3).unwrap();
        top.insert(&Permutation::identity(3).unwrap()).unwrap();
        assert_eq!(discrepancy(&top).abs(), 1);

        let v = sv(&[1.0, 2.0, 3.0]);
        let s13 = threshold_set(&v, &v, 13.0).unwrap();
        assert_eq!(discrepancy(&s13).abs(), 1);
        assert!(discrepancy(&s13).unsigned_abs() <= 2); // n!/n = 2
    }

    #[test]
    fn discrepancy_matches_signed_sum_up_to_global_sign() {
        for n in 2..=5usize {
            let global = if (n * (n - 1) / 2) % 2 == 0 { 1i64 } else { -1 };
            let mut rng = RngStream::new(n as u64, 3);
            for _ in 0..20 {
                let mut set = PermSet::empty(n).unwrap();
                for rank in 0..factorial_u64(n) {
                    if rng.next_u64() % 2 == 0 {
                        set.insert_rank(rank);
                    }
                }
                let signed: i64 = set
                    .iter_permutations()
                    .map(|p| p.parity() as i64)
                    .sum();
                assert_eq!(discrepancy(&set), global * signed);
            }
        }
    }
}
