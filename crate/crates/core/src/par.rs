//! Data-parallel helpers with a sequential fallback.
//!
//! With the `rayon` feature disabled, [`Execution::Parallel`] silently runs
//! sequentially, so callers never need their own `cfg` switches.

use std::ops::Range;

/// How embarrassingly parallel loops (sweeps, searches, rasters) run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `true` when this build can actually run loops in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "rayon")
    }

    fn is_parallel(self) -> bool {
        self == Execution::Parallel && Self::parallel_available()
    }
}

/// `range.map(f).collect()`, order preserved.
pub(crate) fn map_range<R, F>(exec: Execution, range: Range<u64>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    #[cfg(feature = "rayon")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec.is_parallel();
    range.map(f).collect()
}

/// `items.iter().map(f).collect()`, order preserved.
pub(crate) fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "rayon")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec.is_parallel();
    items.iter().map(f).collect()
}

/// The result for the smallest index in `range` where `f` returns `Some`.
///
/// Deterministic: the parallel path returns the same element as the
/// sequential scan.
pub(crate) fn find_first<R, F>(exec: Execution, range: Range<u64>, f: F) -> Option<R>
where
    R: Send,
    F: Fn(u64) -> Option<R> + Sync + Send,
{
    #[cfg(feature = "rayon")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().find_map_first(f);
    }
    let _ = exec.is_parallel();
    range.into_iter().find_map(f)
}
