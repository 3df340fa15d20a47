//! Index-ordered parallel map with a sequential fallback.
//!
//! Results are always returned in index order, so output never depends on
//! the worker count. Without the `parallel` feature every call runs
//! sequentially.

/// Worker count taken from `CYCLEBREAK_WORKERS`, else the number of CPUs.
pub fn default_workers() -> usize {
    std::env::var("CYCLEBREAK_WORKERS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// `(0..n).map(f)` using up to `workers` threads.
pub fn map_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 && n > 1 {
        use rayon::prelude::*;
        return match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            Err(_) => (0..n).map(f).collect(),
        };
    }
    let _ = workers;
    (0..n).map(f).collect()
}

/// Fallible variant of [`map_indexed`]; the error of the lowest failing index
/// is returned.
pub fn try_map_indexed<T, E, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(n, workers, f).into_iter().collect()
}
