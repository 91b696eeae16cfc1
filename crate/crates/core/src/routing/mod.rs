//! Multipath stable-paths routing.
//!
//! Every node holds a *set* of paths to the destination. One synchronous
//! step replaces each node's set by the minimal elements, under the path
//! preorder, of all permitted simple one-arc extensions of its neighbours'
//! sets. When extending a path always makes it strictly less preferred, the
//! step is a strict contraction for the height ultrametric
//! `d(m, n) = max{h(p) : p ∈ m △ n}`, so it is an asynchronously contracting
//! operator under every processor decomposition.

mod decompose;
mod instance;
mod sigma;

use std::fmt;

use thiserror::Error;

pub use decompose::{
    decompose, solve, AsyncRunSummary, Granularity, RoutingOperator, SolveMode, SolveOptions,
    SolveReport,
};
pub use instance::{enumerate_paths, InflationFailure, InstanceFile, PreferenceRule, SppInstance};
pub use sigma::{
    sigma_step, state_distance, state_space, verify_strict_contraction, StrictContractionReport,
};

use crate::iteration::{IterationError, ScheduleError};

/// Index of a path in an instance's path universe.
pub type PathId = usize;

/// Exhaustive checks enumerate `2^n` states for `n` permitted paths.
pub const MAX_EXHAUSTIVE_PATHS: usize = 12;

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("malformed instance: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("({0}) is not a simple path to the destination")]
    UnknownPath(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("instance has {0} simple paths; at most 64 are supported")]
    TooManyPaths(usize),
    #[error("{paths} permitted paths exceed the exhaustive-check limit of {limit}")]
    TooLarge { paths: usize, limit: usize },
    #[error(
        "unknown granularity {0:?} (expected per-node, per-source-destination-nexthop or per-path)"
    )]
    UnknownGranularity(String),
    #[error("preferences are not strictly inflationary: {0}")]
    NotInflationary(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Iteration(#[from] IterationError),
}

/// A set of paths, as a bitmask over the path universe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathSet(u64);

impl PathSet {
    pub const EMPTY: PathSet = PathSet(0);

    pub fn from_bits(bits: u64) -> Self {
        PathSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(p: PathId) -> Self {
        PathSet(1 << p)
    }

    /// The first `n` paths.
    pub fn full(n: usize) -> Self {
        PathSet(if n >= 64 { u64::MAX } else { (1u64 << n) - 1 })
    }

    pub fn contains(self, p: PathId) -> bool {
        self.0 >> p & 1 == 1
    }

    pub fn insert(&mut self, p: PathId) {
        self.0 |= 1 << p;
    }

    pub fn remove(&mut self, p: PathId) {
        self.0 &= !(1 << p);
    }

    pub fn union(self, other: Self) -> Self {
        PathSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        PathSet(self.0 & other.0)
    }

    pub fn symmetric_difference(self, other: Self) -> Self {
        PathSet(self.0 ^ other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = PathId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let p = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(p)
        })
    }

    pub fn filter(self, mut keep: impl FnMut(PathId) -> bool) -> Self {
        let mut out = PathSet::EMPTY;
        for p in self.iter().filter(|&p| keep(p)) {
            out.insert(p);
        }
        out
    }

    /// Every subset of `self`, in increasing bit order.
    pub fn subsets(self) -> impl Iterator<Item = PathSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(PathSet(cur))
        })
    }
}

impl fmt::Display for PathSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests;
