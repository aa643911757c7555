//! Execution-mode switch for the data-parallel inner loops (per-θ
//! eigensolves, probe trials, loop-table folds).
//!
//! With the `parallel` feature (default) `ExecMode::Parallel` fans work out
//! over rayon; without it, or under `ExecMode::Sequential`, the same closures
//! run on one thread. Every fold used with `Parallel` is associative and
//! commutative in exact arithmetic, so results are mode-independent.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

pub fn map_collect<I, R, F>(mode: ExecMode, items: Vec<I>, f: F) -> Vec<R>
where
    I: Send,
    R: Send,
    F: Fn(I) -> R + Send + Sync,
{
    match mode {
        ExecMode::Sequential => items.into_iter().map(f).collect(),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                items.into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                items.into_iter().map(f).collect()
            }
        }
    }
}

/// Map then reduce with an associative, commutative combiner.
pub fn map_reduce<I, R, F, C>(mode: ExecMode, items: Vec<I>, identity: impl Fn() -> R + Send + Sync, f: F, combine: C) -> R
where
    I: Send,
    R: Send,
    F: Fn(I) -> R + Send + Sync,
    C: Fn(R, R) -> R + Send + Sync,
{
    match mode {
        ExecMode::Sequential => items.into_iter().map(f).fold(identity(), combine),
        ExecMode::Parallel => {
            #[cfg(feature = "parallel")]
            {
                items.into_par_iter().map(f).reduce(&identity, combine)
            }
            #[cfg(not(feature = "parallel"))]
            {
                items.into_iter().map(f).fold(identity(), combine)
            }
        }
    }
}
