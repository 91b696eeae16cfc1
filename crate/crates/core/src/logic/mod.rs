//! Locally stratified ground logic programs.
//!
//! The immediate consequence operator `T_P` is iterated from the empty
//! interpretation. Interpretations are compared with the stratification
//! ultrametric `d(I, J) = 2^-s`, `s` the least level at which they differ,
//! so agreeing on more of the lower strata means being closer.

mod eval;
mod program;
mod strata;

use std::fmt;

use thiserror::Error;

pub use eval::{
    classify_tp_contraction, compute_perfect_model, immediate_consequence, interpretation_distance,
    interpretation_space, literal_interpretation_distance, stratification, stratified_model,
    tp_operator, PerfectModel, TpClassification,
};
pub use program::{AtomId, Clause, GroundProgram, Literal};
pub use strata::{find_stratification, NegativeCycle, StrataViolation, Stratification};

/// Interpretations are bitmasks, which caps the Herbrand base.
pub const MAX_ATOMS: usize = 64;

/// Exhaustive checks enumerate all `2^n` interpretations.
pub const MAX_EXHAUSTIVE_ATOMS: usize = 12;

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("program has {0} atoms; at most 64 are supported")]
    TooManyAtoms(usize),
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
    #[error("program is not stratifiable: negative dependency cycle {0}")]
    NotStratified(String),
    #[error("declared strata are invalid: {0}")]
    BadStrata(String),
    #[error("{atoms} atoms exceed the exhaustive-check limit of {limit}")]
    TooLarge { atoms: usize, limit: usize },
    #[error("T_P iteration cycles (period {period} from step {start})")]
    Cycle { start: usize, period: usize },
    #[error("iterated fixed point {iterated} disagrees with stratified evaluation {stratified}")]
    OracleMismatch {
        iterated: String,
        stratified: String,
    },
}

/// A set of true atoms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation(u64);

impl Interpretation {
    pub const EMPTY: Interpretation = Interpretation(0);

    pub fn from_bits(bits: u64) -> Self {
        Interpretation(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn full(n: usize) -> Self {
        Interpretation(if n >= 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let mut i = Interpretation::EMPTY;
        for (a, &v) in values.iter().enumerate() {
            if v {
                i.insert(a);
            }
        }
        i
    }

    pub fn to_bools(self, n: usize) -> Vec<bool> {
        (0..n).map(|a| self.contains(a)).collect()
    }

    pub fn contains(self, a: AtomId) -> bool {
        self.0 >> a & 1 == 1
    }

    pub fn insert(&mut self, a: AtomId) {
        self.0 |= 1 << a;
    }

    pub fn symmetric_difference(self, other: Self) -> Self {
        Interpretation(self.0 ^ other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = AtomId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let a = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(a)
        })
    }

    /// Every subset, in increasing bit order.
    pub fn subsets(self) -> impl Iterator<Item = Interpretation> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some(cur.wrapping_sub(mask) & mask)
            };
            Some(Interpretation(cur))
        })
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

#[cfg(test)]
mod tests;
