//! Ordered batch execution with an optional rayon backend.
//!
//! Results always come back in input order, so optimizers consume random
//! numbers and rank candidates identically under either strategy.

/// Environment variable read by [`configure_threads_from_env`].
pub const THREADS_ENV: &str = "TRUSSOPT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon work-stealing pool. Falls back to sequential without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }
}

/// Sizes the global rayon pool from `TRUSSOPT_THREADS` if set.
///
/// Returns the thread count applied, or `None` when the variable is unset,
/// unparsable, or the pool was already initialised. Without the `parallel`
/// feature this is a no-op.
pub fn configure_threads_from_env() -> Option<usize> {
    let n: usize = std::env::var(THREADS_ENV).ok()?.trim().parse().ok()?;
    configure_threads(n)
}

pub fn configure_threads(n: usize) -> Option<usize> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok()
            .map(|_| n)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        None
    }
}
