//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the current
//! rayon pool; without it, or with [`Execution::Sequential`], everything runs
//! on the calling thread. Results are identical either way: maps keep input
//! order and reductions only add integers.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this build can actually run in parallel.
    pub fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// Map `f` over `items`, preserving order, stopping at the first error.
pub(crate) fn map_ordered<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Sum `trial(state, t)` over `range`, with one `init()` state per worker.
pub(crate) fn sum_trials<S, I, F, E>(mode: Execution, range: Range<u64>, init: I, trial: F) -> Result<(u64, u64), E>
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, u64) -> Result<(u64, u64), E> + Sync + Send,
    E: Send,
{
    let add = |a: (u64, u64), b: (u64, u64)| (a.0 + b.0, a.1 + b.1);
    #[cfg(feature = "parallel")]
    if mode == Execution::Parallel {
        use rayon::prelude::*;
        return range
            .into_par_iter()
            .map_init(&init, |s, t| trial(s, t))
            .try_reduce(|| (0, 0), |a, b| Ok(add(a, b)));
    }
    let _ = mode;
    let mut state = init();
    let mut acc = (0, 0);
    for t in range {
        acc = add(acc, trial(&mut state, t)?);
    }
    Ok(acc)
}
