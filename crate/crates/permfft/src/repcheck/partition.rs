//! Partitions, hook lengths, dimensions, and the dimension-bound report.

use num::bigint::BigUint;
use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

use super::PARTITIONS_CAP;

/// A partition of n: weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidArgument("empty partition".into()));
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidArgument("zero part in partition".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "parts not weakly decreasing: {parts:?}"
            )));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn n(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn rows(&self) -> usize {
        self.parts.len()
    }

    /// Transpose of the Young diagram.
    pub fn conjugate(&self) -> Partition {
        let cols = self.parts[0];
        let parts = (0..cols)
            .map(|j| self.parts.iter().filter(|&&p| p > j).count())
            .collect();
        Partition { parts }
    }

    pub(crate) fn from_raw(parts: Vec<usize>) -> Partition {
        debug_assert!(!parts.is_empty() && parts.windows(2).all(|w| w[0] >= w[1]));
        Partition { parts }
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of n, each once, in descending lexicographic order:
/// `(n)` first, `(1,1,...,1)` last.
pub fn partitions(n: usize) -> Result<Vec<Partition>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if n > PARTITIONS_CAP {
        return Err(Error::SizeLimit {
            n,
            limit: PARTITIONS_CAP,
            what: "partition enumeration",
        });
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    descend(n, n, &mut current, &mut out);
    Ok(out)
}

fn descend(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition {
            parts: current.clone(),
        });
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        current.push(part);
        descend(remaining - part, part, current, out);
        current.pop();
    }
}

/// Hook lengths of every cell, row-major.
pub fn hook_lengths(p: &Partition) -> Vec<usize> {
    let conj = p.conjugate();
    let mut hooks = Vec::with_capacity(p.n());
    for (i, &row) in p.parts.iter().enumerate() {
        for j in 0..row {
            hooks.push(row - j + conj.parts[j] - i - 1);
        }
    }
    hooks
}

pub(crate) fn factorial_big(n: usize) -> BigUint {
    let mut f = BigUint::one();
    for k in 2..=n {
        f *= BigUint::from(k);
    }
    f
}

/// Dimension of the irreducible representation labelled by `p`, via the
/// hook-length formula `n! / prod(hooks)`. Exact; the division has no
/// remainder for any valid partition.
pub fn hook_dimension(p: &Partition) -> BigUint {
    let mut denom = BigUint::one();
    for h in hook_lengths(p) {
        denom *= BigUint::from(h);
    }
    let numer = factorial_big(p.n());
    let (q, r) = num::Integer::div_rem(&numer, &denom);
    assert!(r.is_zero(), "hook product must divide n! exactly");
    q
}

#[derive(Debug, Clone, Serialize)]
pub struct DimRecord {
    pub partition: String,
    pub dimension: String,
    /// Whether `3 d > n^2` holds, compared in exact integers.
    pub exceeds_threshold: bool,
}

/// Dimensions of all representations versus the `n^2 / 3` threshold.
///
/// The theorem this probes is asymptotic (stated for n >= 400); at small n the
/// report is informational: it states whether every non-exceptional dimension
/// clears the threshold, without asserting that it must.
#[derive(Debug, Clone, Serialize)]
pub struct DimBoundReport {
    pub n: usize,
    /// `n^2 / 3`.
    pub threshold: f64,
    /// The theorem only claims anything for n >= 400.
    pub theorem_applies: bool,
    /// Partitions excluded by the theorem: trivial, alternating, (n-1,1) and
    /// its conjugate; with their (known) dimensions.
    pub exceptional: Vec<DimRecord>,
    pub records: Vec<DimRecord>,
    pub min_dimension_outside_exceptional: Option<String>,
    pub argmin_partition: Option<String>,
    pub all_exceed_threshold: bool,
}

/// Enumerates all partitions of n, verifies the Plancherel identity
/// `sum d^2 = n!` exactly (internal-consistency failure otherwise), and
/// reports every non-exceptional dimension against `n^2/3`.
pub fn dim_bound_report(n: usize) -> Result<DimBoundReport> {
    let parts = partitions(n)?;
    let dims: Vec<BigUint> = parts.iter().map(hook_dimension).collect();

    let mut square_sum = BigUint::zero();
    for d in &dims {
        square_sum += d * d;
    }
    let nfact = factorial_big(n);
    if square_sum != nfact {
        return Err(Error::Inconsistency(format!(
            "sum of squared dimensions {square_sum} != {n}! = {nfact}"
        )));
    }

    let mut exceptional_parts: Vec<Partition> = Vec::new();
    let full = Partition::from_raw(vec![n]);
    let column = Partition::from_raw(vec![1; n]);
    exceptional_parts.push(full);
    if !exceptional_parts.contains(&column) {
        exceptional_parts.push(column);
    }
    if n >= 2 {
        let hook_row = {
            let mut v = vec![n - 1, 1];
            v.retain(|&p| p > 0);
            Partition::from_raw(v)
        };
        let hook_col = hook_row.conjugate();
        for cand in [hook_row, hook_col] {
            if !exceptional_parts.contains(&cand) {
                exceptional_parts.push(cand);
            }
        }
    }

    let n_sq = BigUint::from(n) * BigUint::from(n);
    let three = BigUint::from(3u32);
    let exceeds = |d: &BigUint| -> bool { &(d * &three) > &n_sq };

    let mut exceptional = Vec::new();
    let mut records = Vec::new();
    let mut min_dim: Option<(&BigUint, &Partition)> = None;
    let mut all_exceed = true;
    for (p, d) in parts.iter().zip(&dims) {
        let record = DimRecord {
            partition: p.to_string(),
            dimension: d.to_string(),
            exceeds_threshold: exceeds(d),
        };
        if exceptional_parts.contains(p) {
            exceptional.push(record);
            continue;
        }
        if !record.exceeds_threshold {
            all_exceed = false;
        }
        if min_dim.map_or(true, |(best, _)| d < best) {
            min_dim = Some((d, p));
        }
        records.push(record);
    }

    Ok(DimBoundReport {
        n,
        threshold: (n * n) as f64 / 3.0,
        theorem_applies: n >= 400,
        exceptional,
        records,
        min_dimension_outside_exceptional: min_dim.map(|(d, _)| d.to_string()),
        argmin_partition: min_dim.map(|(_, p)| p.to_string()),
        all_exceed_threshold: all_exceed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![3, 1, 1]).is_ok());
    }

    #[test]
    fn partitions_of_four_in_canonical_order() {
        let got: Vec<Vec<usize>> = partitions(4)
            .unwrap()
            .into_iter()
            .map(|p| p.parts().to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![4],
                vec![3, 1],
                vec![2, 2],
                vec![2, 1, 1],
                vec![1, 1, 1, 1]
            ]
        );
        assert_eq!(partitions(1).unwrap().len(), 1);
        assert!(partitions(0).is_err());
        assert!(partitions(41).is_err());
    }

    /// Independent count oracle: the classic p(n, max_part) recurrence.
    fn partition_count_oracle(n: usize) -> u64 {
        let mut table = vec![vec![0u64; n + 1]; n + 1];
        for max in 0..=n {
            table[0][max] = 1;
        }
        for total in 1..=n {
            for max in 1..=n {
                let mut c = table[total][max - 1];
                if total >= max {
                    c += table[total - max][max];
                }
                table[total][max] = c;
            }
        }
        table[n][n]
    }

    #[test]
    fn partition_counts_match_recurrence() {
        assert_eq!(partitions(10).unwrap().len(), 42);
        for n in 1..=20 {
            assert_eq!(
                partitions(n).unwrap().len() as u64,
                partition_count_oracle(n),
                "p({n})"
            );
        }
    }

    #[test]
    fn conjugation_is_an_involution() {
        for n in 1..=10 {
            for p in partitions(n).unwrap() {
                assert_eq!(p.conjugate().conjugate(), p);
                assert_eq!(p.conjugate().n(), n);
            }
        }
    }

    #[test]
    fn hook_dimensions_closed_forms() {
        for n in 2..=12usize {
            let full = Partition::new(vec![n]).unwrap();
            assert_eq!(hook_dimension(&full), BigUint::from(1u32));
            let col = Partition::new(vec![1; n]).unwrap();
            assert_eq!(hook_dimension(&col), BigUint::from(1u32));
            let hook = Partition::new(vec![n - 1, 1]).unwrap();
            assert_eq!(hook_dimension(&hook), BigUint::from(n - 1));
            assert_eq!(hook_dimension(&hook.conjugate()), BigUint::from(n - 1));
        }
        let two_two = Partition::new(vec![2, 2]).unwrap();
        let mut hooks = hook_lengths(&two_two);
        hooks.sort_unstable();
        assert_eq!(hooks, vec![1, 2, 2, 3]);
        assert_eq!(hook_dimension(&two_two), BigUint::from(2u32));
    }

    #[test]
    fn plancherel_identity_small_n() {
        for n in 1..=14usize {
            let mut sum = BigUint::zero();
            for p in partitions(n).unwrap() {
                let d = hook_dimension(&p);
                sum += &d * &d;
            }
            assert_eq!(sum, factorial_big(n), "n={n}");
        }
    }

    #[test]
    fn dim_report_at_ten() {
        let report = dim_bound_report(10).unwrap();
        assert!(!report.theorem_applies);
        assert_eq!(report.exceptional.len(), 4);
        assert_eq!(report.records.len(), 42 - 4);
        let min: u64 = report
            .min_dimension_outside_exceptional
            .as_ref()
            .unwrap()
            .parse()
            .unwrap();
        assert!(min > 0);
        for record in &report.records {
            let d: u64 = record.dimension.parse().unwrap();
            assert!(d >= min);
            assert_eq!(record.exceeds_threshold, 3 * d > 100);
        }
    }

    #[test]
    fn dim_report_exceptional_dims_are_known() {
        for n in [4usize, 7, 10] {
            let report = dim_bound_report(n).unwrap();
            let mut dims: Vec<u64> = report
                .exceptional
                .iter()
                .map(|r| r.dimension.parse().unwrap())
                .collect();
            dims.sort_unstable();
            assert_eq!(dims, vec![1, 1, (n - 1) as u64, (n - 1) as u64]);
        }
    }
}
