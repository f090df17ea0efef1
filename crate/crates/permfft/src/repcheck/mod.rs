//! Exact integer verification of the combinatorial facts behind the sampler.
//!
//! The accuracy argument for the batched estimator rests on symmetric-group
//! machinery: character ratio bounds over partitions, and the structure of
//! threshold sets in the factorial lattice. None of that can be *proved* here,
//! but at small n every ingredient is finite and checkable in exact integer
//! arithmetic. This module does that checking: partitions and hook-length
//! dimensions, Murnaghan-Nakayama character values, the Fomin-Lulov bound,
//! Lehmer codes, upper sets, and discrepancy.
//!
//! Everything is exact: `BigUint`/`BigInt`/`BigRational` throughout; no
//! floating point touches a bound check.

mod character;
mod lattice;
mod partition;

pub use character::{
    character_ratio_max, class_size, mn_character, CharacterEvaluator, CycleType,
    FominLulovReport, FominLulovRow,
};
pub use character::fomin_lulov_check;
pub use lattice::{
    discrepancy, is_upper_set, lehmer_code, permutation_from_code, threshold_set, LehmerCode,
    PermSet,
};
pub use partition::{
    dim_bound_report, hook_dimension, hook_lengths, partitions, DimBoundReport, DimRecord,
    Partition,
};

/// Full-S_n enumeration (threshold sets, upper-set checks, discrepancy) stops
/// here: 8! = 40320 elements.
pub const SN_ENUM_CAP: usize = 8;

/// Partition enumeration cap; p(40) = 37338 entries is still instant.
pub const PARTITIONS_CAP: usize = 40;

/// Character suites run to here by default (p(14) = 135 partitions).
pub const DEFAULT_CHARACTER_CAP: usize = 14;

/// Hard ceiling on character work; beyond this the memoized recursion cost is
/// no longer negligible and callers should know what they are doing.
pub const MAX_CHARACTER_CAP: usize = 22;
