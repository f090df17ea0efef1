//! Exact symmetric-group characters and the bounds built from them.
//!
//! Characters are evaluated by the Murnaghan-Nakayama rule in its beta-number
//! (first-column hook length) form: removing a border strip of length r from
//! the diagram is exactly replacing some beta number `b >= r` whose partner
//! `b - r` is absent by `b - r`, with sign `(-1)^h` where h counts the beta
//! numbers strictly between the two. The recursion is memoized per
//! (partition, remaining cycles) pair; all values are exact integers.

use std::collections::HashMap;

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;

use super::partition::{factorial_big, hook_dimension, partitions, Partition};
use super::MAX_CHARACTER_CAP;

/// A conjugacy class of S_n, stored as cycle lengths in weakly decreasing
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycleType {
    cycles: Vec<usize>,
}

impl CycleType {
    pub fn new(mut cycles: Vec<usize>) -> Result<Self> {
        if cycles.is_empty() || cycles.iter().any(|&c| c == 0) {
            return Err(Error::InvalidArgument(
                "cycle lengths must be positive and nonempty".into(),
            ));
        }
        cycles.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { cycles })
    }

    /// The class `[r^m]`: m cycles of length r.
    pub fn rectangular(r: usize, m: usize) -> Result<Self> {
        if r == 0 || m == 0 {
            return Err(Error::InvalidArgument(
                "rectangular class needs r >= 1, m >= 1".into(),
            ));
        }
        Ok(Self {
            cycles: vec![r; m],
        })
    }

    pub fn of(p: &Permutation) -> CycleType {
        CycleType {
            cycles: p.cycle_lengths(),
        }
    }

    pub fn cycles(&self) -> &[usize] {
        &self.cycles
    }

    pub fn n(&self) -> usize {
        self.cycles.iter().sum()
    }

    pub fn fixed_points(&self) -> usize {
        self.cycles.iter().filter(|&&c| c == 1).count()
    }

    /// `(-1)^(n - number of cycles)`.
    pub fn parity(&self) -> i32 {
        if (self.n() - self.cycles.len()) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Number of permutations in the class:
    /// `n! / prod_a (a^{b_a} b_a!)` over lengths a with multiplicity b_a.
    pub fn class_size(&self) -> BigUint {
        let mut denom = BigUint::one();
        let mut i = 0;
        while i < self.cycles.len() {
            let a = self.cycles[i];
            let mut b = 0usize;
            while i < self.cycles.len() && self.cycles[i] == a {
                b += 1;
                i += 1;
            }
            for _ in 0..b {
                denom *= BigUint::from(a);
            }
            denom *= factorial_big(b);
        }
        factorial_big(self.n()) / denom
    }
}

impl std::fmt::Display for CycleType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.cycles.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Memoizing Murnaghan-Nakayama evaluator. One instance per task; the cache
/// maps (partition, cycle suffix) to the exact character value.
pub struct CharacterEvaluator {
    memo: HashMap<(Vec<usize>, Vec<usize>), BigInt>,
}

impl Default for CharacterEvaluator {
    fn default() -> Self {
        Self::new()
    }
}

impl CharacterEvaluator {
    pub fn new() -> Self {
        Self {
            memo: HashMap::new(),
        }
    }

    /// Exact character value `chi_p(c)`.
    pub fn character(&mut self, p: &Partition, c: &CycleType) -> Result<BigInt> {
        let n = p.n();
        if n != c.n() {
            return Err(Error::DimensionMismatch {
                left: n,
                right: c.n(),
            });
        }
        if n > MAX_CHARACTER_CAP {
            return Err(Error::SizeLimit {
                n,
                limit: MAX_CHARACTER_CAP,
                what: "character evaluation",
            });
        }
        Ok(self.eval(p.parts(), c.cycles()))
    }

    fn eval(&mut self, parts: &[usize], cycles: &[usize]) -> BigInt {
        if parts.is_empty() {
            debug_assert!(cycles.is_empty());
            return BigInt::one();
        }
        let key = (parts.to_vec(), cycles.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }

        let r = cycles[0];
        let rest = &cycles[1..];
        let rows = parts.len();
        // beta numbers: strictly decreasing first-column hook lengths
        let beta: Vec<usize> = parts
            .iter()
            .enumerate()
            .map(|(i, &part)| part + (rows - 1 - i))
            .collect();

        let mut total = BigInt::zero();
        for (idx, &b) in beta.iter().enumerate() {
            if b < r {
                continue;
            }
            let target = b - r;
            if beta.contains(&target) {
                continue;
            }
            // height = count of beta numbers strictly between target and b
            let height = beta
                .iter()
                .filter(|&&other| other < b && other > target)
                .count();

            let mut new_beta = beta.clone();
            new_beta[idx] = target;
            new_beta.sort_unstable_by(|a, b| b.cmp(a));
            let mut new_parts: Vec<usize> = new_beta
                .iter()
                .enumerate()
                .map(|(i, &nb)| nb - (rows - 1 - i))
                .collect();
            while new_parts.last() == Some(&0) {
                new_parts.pop();
            }

            let sub = self.eval(&new_parts, rest);
            if height % 2 == 0 {
                total += sub;
            } else {
                total -= sub;
            }
        }

        self.memo.insert(key, total.clone());
        total
    }
}

/// One-shot character evaluation (fresh memo table).
pub fn mn_character(p: &Partition, c: &CycleType) -> Result<BigInt> {
    CharacterEvaluator::new().character(p, c)
}

/// Maximum of `|chi_p([r^{n/r}])| / d_p` over all partitions of n except the
/// trivial `(n)` and alternating `(1^n)`, as an exact rational, with its
/// maximiser.
pub fn character_ratio_max(n: usize, r: usize) -> Result<(BigRational, Partition)> {
    if r < 2 || n % r != 0 {
        return Err(Error::InvalidArgument(format!(
            "r = {r} must be at least 2 and divide n = {n}"
        )));
    }
    if n > MAX_CHARACTER_CAP {
        return Err(Error::SizeLimit {
            n,
            limit: MAX_CHARACTER_CAP,
            what: "character ratio scan",
        });
    }
    let class = CycleType::rectangular(r, n / r)?;
    let mut evaluator = CharacterEvaluator::new();
    let mut best: Option<(BigRational, Partition)> = None;
    for p in partitions(n)? {
        if p.parts() == [n] || p.parts().iter().all(|&x| x == 1) {
            continue;
        }
        let chi = evaluator.character(&p, &class)?;
        let dim = BigInt::from(hook_dimension(&p));
        let ratio = BigRational::new(chi.abs(), dim);
        match &best {
            Some((current, _)) if *current >= ratio => {}
            _ => best = Some((ratio, p)),
        }
    }
    best.ok_or_else(|| {
        Error::InvalidArgument(format!("no non-excluded partitions for n = {n}"))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FominLulovRow {
    pub partition: String,
    pub character_abs: String,
    pub dimension: String,
    /// `rhs / lhs` of the integer form of the bound, as a float for display;
    /// at least 1 when the bound holds. Absent when chi = 0 (bound trivial).
    pub slack: Option<f64>,
    pub holds: bool,
}

/// Outcome of checking `|chi_p([r^m])| <= m! r^m / (mr)!^{1/r} * d_p^{1/r}`
/// for every partition of n = m r.
#[derive(Debug, Clone, Serialize)]
pub struct FominLulovReport {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub checked: usize,
    pub all_hold: bool,
    /// Row with the smallest slack among those with nonzero character.
    pub tightest: Option<FominLulovRow>,
    pub rows: Vec<FominLulovRow>,
}

/// Verifies the Fomin-Lulov character bound for all partitions of n.
///
/// The bound involves r-th roots, so it is checked in the equivalent integer
/// form `|chi|^r (mr)! <= (m! r^m)^r d_p`, which is exact.
pub fn fomin_lulov_check(n: usize, r: usize) -> Result<FominLulovReport> {
    if r < 2 || n % r != 0 {
        return Err(Error::InvalidArgument(format!(
            "r = {r} must be at least 2 and divide n = {n}"
        )));
    }
    if n > MAX_CHARACTER_CAP {
        return Err(Error::SizeLimit {
            n,
            limit: MAX_CHARACTER_CAP,
            what: "Fomin-Lulov sweep",
        });
    }
    let m = n / r;
    let class = CycleType::rectangular(r, m)?;
    let mut evaluator = CharacterEvaluator::new();

    // (m! r^m)^r, shared across rows
    let mut factor = factorial_big(m);
    for _ in 0..m {
        factor *= BigUint::from(r);
    }
    let factor_pow = pow_big(&factor, r);
    let mr_fact = factorial_big(n);

    let mut rows = Vec::new();
    let mut all_hold = true;
    let mut tightest: Option<FominLulovRow> = None;
    for p in partitions(n)? {
        let chi = evaluator.character(&p, &class)?;
        let chi_abs = chi.abs().to_biguint().expect("abs is nonnegative");
        let dim = hook_dimension(&p);
        let lhs = pow_big(&chi_abs, r) * &mr_fact;
        let rhs = &factor_pow * &dim;
        let holds = lhs <= rhs;
        let slack = if chi_abs.is_zero() {
            None
        } else {
            BigRational::new(BigInt::from(rhs.clone()), BigInt::from(lhs.clone()))
                .to_f64()
                .or(Some(f64::INFINITY))
        };
        let row = FominLulovRow {
            partition: p.to_string(),
            character_abs: chi_abs.to_string(),
            dimension: dim.to_string(),
            slack,
            holds,
        };
        if !holds {
            all_hold = false;
        }
        if let Some(s) = row.slack {
            let replace = match &tightest {
                Some(t) => s < t.slack.unwrap_or(f64::INFINITY),
                None => true,
            };
            if replace {
                tightest = Some(row.clone());
            }
        }
        rows.push(row);
    }

    Ok(FominLulovReport {
        n,
        r,
        m,
        checked: rows.len(),
        all_hold,
        tightest,
        rows,
    })
}

fn pow_big(base: &BigUint, exp: usize) -> BigUint {
    let mut out = BigUint::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

/// Class size helper at module level (mirrors `CycleType::class_size`).
pub fn class_size(c: &CycleType) -> BigUint {
    c.class_size()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn ct(cycles: &[usize]) -> CycleType {
        CycleType::new(cycles.to_vec()).unwrap()
    }

    fn chi(parts: &[usize], cycles: &[usize]) -> i64 {
        mn_character(&pt(parts), &ct(cycles))
            .unwrap()
            .to_i64()
            .unwrap()
    }

    // Character table of S_4, derived by hand from the permutation action:
    // chi_perm(c) = fixed points; standard = perm - trivial; the rest follow
    // from tensoring with the sign character and column orthogonality.
    // Classes in the order [1^4], [2,1,1], [2,2], [3,1], [4].
    const S4_CLASSES: [&[usize]; 5] = [&[1, 1, 1, 1], &[2, 1, 1], &[2, 2], &[3, 1], &[4]];
    const S4_SIZES: [u64; 5] = [1, 6, 3, 8, 6];
    const S4_TABLE: [(&[usize], [i64; 5]); 5] = [
        (&[4], [1, 1, 1, 1, 1]),
        (&[3, 1], [3, 1, -1, 0, -1]),
        (&[2, 2], [2, 0, 2, -1, 0]),
        (&[2, 1, 1], [3, -1, -1, 0, 1]),
        (&[1, 1, 1, 1], [1, -1, 1, 1, -1]),
    ];

    #[test]
    fn s4_character_table_matches() {
        for (parts, expected) in S4_TABLE {
            for (class, want) in S4_CLASSES.iter().zip(expected) {
                assert_eq!(
                    chi(parts, class),
                    want,
                    "chi_{parts:?}({class:?})"
                );
            }
        }
    }

    #[test]
    fn trivial_and_sign_rows() {
        for n in 1..=8usize {
            for class in all_cycle_types(n) {
                assert_eq!(chi(&[n], class.cycles()), 1);
                let sign = chi(&vec![1; n], class.cycles());
                assert_eq!(sign, class.parity() as i64);
            }
        }
    }

    #[test]
    fn standard_rep_is_fixed_points_minus_one() {
        for n in 2..=8usize {
            let parts = vec![n - 1, 1];
            let parts: Vec<usize> = parts.into_iter().filter(|&p| p > 0).collect();
            for class in all_cycle_types(n) {
                let expect = class.fixed_points() as i64 - 1;
                assert_eq!(chi(&parts, class.cycles()), expect, "n={n} c={class}");
            }
        }
    }

    #[test]
    fn conjugate_partition_twists_by_sign() {
        for n in 2..=8usize {
            for p in partitions(n).unwrap() {
                let q = p.conjugate();
                for class in all_cycle_types(n) {
                    let a = mn_character(&p, &class).unwrap();
                    let b = mn_character(&q, &class).unwrap();
                    let expected = if class.parity() == 1 { a.clone() } else { -a.clone() };
                    assert_eq!(b, expected, "p={p} c={class}");
                }
            }
        }
    }

    #[test]
    fn identity_column_is_the_dimension() {
        for n in 1..=10usize {
            let id = CycleType::rectangular(1, n).unwrap();
            for p in partitions(n).unwrap() {
                assert_eq!(
                    mn_character(&p, &id).unwrap(),
                    BigInt::from(hook_dimension(&p)),
                    "p={p}"
                );
            }
        }
    }

    fn all_cycle_types(n: usize) -> Vec<CycleType> {
        partitions(n)
            .unwrap()
            .into_iter()
            .map(|p| CycleType::new(p.parts().to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn class_sizes_partition_the_group() {
        for n in 1..=10usize {
            let mut total = BigUint::zero();
            for class in all_cycle_types(n) {
                total += class.class_size();
            }
            assert_eq!(total, factorial_big(n), "n={n}");
        }
        // spot values in S_4
        for (class, size) in S4_CLASSES.iter().zip(S4_SIZES) {
            assert_eq!(ct(class).class_size(), BigUint::from(size));
        }
    }

    #[test]
    fn column_orthogonality_certifies_the_table() {
        // sum_p chi_p(c) chi_p(c') = delta_{cc'} n!/|c|, exact
        for n in 1..=8usize {
            let classes = all_cycle_types(n);
            let parts = partitions(n).unwrap();
            let mut evaluator = CharacterEvaluator::new();
            let table: Vec<Vec<BigInt>> = parts
                .iter()
                .map(|p| {
                    classes
                        .iter()
                        .map(|c| evaluator.character(p, c).unwrap())
                        .collect()
                })
                .collect();
            for (i, ci) in classes.iter().enumerate() {
                for (j, _cj) in classes.iter().enumerate() {
                    let mut sum = BigInt::zero();
                    for row in &table {
                        sum += &row[i] * &row[j];
                    }
                    let expect = if i == j {
                        BigInt::from(factorial_big(n) / ci.class_size())
                    } else {
                        BigInt::zero()
                    };
                    assert_eq!(sum, expect, "n={n} classes {i},{j}");
                }
            }
        }
    }

    #[test]
    fn ratio_max_on_s4() {
        // r=4, class [4]: non-excluded partitions (3,1),(2,2),(2,1,1) have
        // |chi| = 1, 0, 1 over dims 3, 2, 3: max ratio 1/3, first attained at
        // (3,1)
        let (ratio, argmax) = character_ratio_max(4, 4).unwrap();
        assert_eq!(ratio, BigRational::new(BigInt::from(1), BigInt::from(3)));
        assert_eq!(argmax.parts(), &[3, 1]);

        // r=2 on [2,2]: |chi_(3,1)| = 1 over dim 3; |chi_(2,2)| = 2 over 2 = 1
        let (ratio, argmax) = character_ratio_max(4, 2).unwrap();
        assert_eq!(ratio, BigRational::new(BigInt::from(1), BigInt::from(1)));
        assert_eq!(argmax.parts(), &[2, 2]);

        assert!(character_ratio_max(4, 3).is_err());
        assert!(character_ratio_max(4, 1).is_err());
    }

    #[test]
    fn ratio_never_returns_excluded_partitions() {
        for n in [4usize, 6, 8, 9] {
            for r in 2..=n {
                if n % r != 0 {
                    continue;
                }
                let (_, argmax) = character_ratio_max(n, r).unwrap();
                assert_ne!(argmax.parts(), &[n]);
                assert!(!argmax.parts().iter().all(|&x| x == 1));
            }
        }
    }

    #[test]
    fn fomin_lulov_small_cases() {
        let report = fomin_lulov_check(4, 2).unwrap();
        assert_eq!(report.checked, 5);
        assert!(report.all_hold);
        assert!(report.tightest.is_some());

        let report = fomin_lulov_check(6, 3).unwrap();
        assert_eq!(report.checked, 11);
        assert!(report.all_hold);

        // trivial partition: chi = 1, d = 1; slack must be >= 1
        let row = report
            .rows
            .iter()
            .find(|row| row.partition == "(6)")
            .unwrap();
        assert!(row.holds);
        assert!(row.slack.unwrap() >= 1.0);

        assert!(fomin_lulov_check(5, 2).is_err());
    }
}
