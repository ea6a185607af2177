//! Data-parallel maps with a sequential fallback.
//!
//! `SUPERWEYL_THREADS` caps the worker count; 0 forces the sequential path.
//! Results always come back in index order, so callers that reduce them
//! sequentially get bit-identical output on either path.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

/// Thread cap from the environment, if set and valid.
pub fn thread_cap() -> Option<usize> {
    std::env::var("SUPERWEYL_THREADS").ok()?.trim().parse().ok()
}

/// The path selected by build features and `SUPERWEYL_THREADS`.
pub fn default_execution() -> Execution {
    if cfg!(feature = "parallel") && thread_cap() != Some(0) {
        Execution::Parallel
    } else {
        Execution::Sequential
    }
}

#[cfg(feature = "parallel")]
fn pool() -> Option<&'static rayon::ThreadPool> {
    use std::sync::OnceLock;
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let k = thread_cap().filter(|&k| k > 0)?;
        rayon::ThreadPoolBuilder::new().num_threads(k).build().ok()
    })
    .as_ref()
}

/// `(0..count).map(f)` on the default path.
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_with(default_execution(), count, f)
}

pub fn map_indexed_with<T, F>(exec: Execution, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..count).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            let run = || (0..count).into_par_iter().map(&f).collect();
            match pool() {
                Some(p) => p.install(run),
                None => run(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => (0..count).map(f).collect(),
    }
}
