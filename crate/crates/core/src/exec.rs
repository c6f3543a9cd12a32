//! Sequential / data-parallel execution of independent work items.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon pool; without it, it falls back to the sequential path. Results never
//! depend on the choice: work items must be pure functions of their index.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether `Parallel` actually fans out in this build.
    pub const PARALLEL_AVAILABLE: bool = cfg!(feature = "parallel");
}

/// `f(i)` for every `i` in `0..n`, in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Maps every item, preserving order.
pub fn map_slice<I, T, F>(items: &[I], exec: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indexed(items.len(), exec, |i| f(&items[i]))
}

/// Folds `f(i)` over `0..n` with an associative, commutative `combine`.
pub fn fold_indexed<A, F, C>(n: usize, exec: Execution, identity: A, f: F, combine: C) -> A
where
    A: Clone + Send + Sync,
    F: Fn(usize) -> A + Sync + Send,
    C: Fn(A, A) -> A + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(f)
                .reduce(|| identity.clone(), &combine)
        }
        _ => (0..n).map(f).fold(identity, combine),
    }
}
