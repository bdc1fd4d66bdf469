//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] runs on
//! the rayon global pool. Without it, both variants run sequentially, so
//! callers never need their own `cfg` switches.
//!
//! Every combinator preserves input order in its output, and reductions
//! are only ever applied to associative, commutative aggregates (integer
//! counts, exact rationals), so results do not depend on the worker count.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this build can actually run work in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }

    /// Maps `f` over `range`, collecting results in index order.
    pub fn map_collect<R, F>(self, range: Range<usize>, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().map(f).collect(),
            _ => range.map(f).collect(),
        }
    }

    /// Maps `f` over `range` and folds the results with `reduce`.
    ///
    /// `reduce` must be associative and commutative with `identity` as its
    /// neutral element.
    pub fn map_reduce<R, F, I, G>(self, range: Range<usize>, f: F, identity: I, reduce: G) -> R
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
        I: Fn() -> R + Sync + Send,
        G: Fn(R, R) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => range.into_par_iter().map(f).reduce(identity, reduce),
            _ => range.map(f).fold(identity(), reduce),
        }
    }
}
