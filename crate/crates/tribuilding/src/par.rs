//! Data-parallel helpers with a sequential fallback.
//!
//! Built with the `parallel` feature (default) these fan out over rayon;
//! without it they are plain iterator loops. Callers must only use them for
//! order-independent work so both builds produce identical results.

#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn flat_map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Vec<U> + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().flat_map_iter(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn flat_map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> Vec<U>,
{
    items.iter().flat_map(f).collect()
}

/// Runs `f` with parallelism disabled.
///
/// With the `parallel` feature this installs a single-threaded rayon pool for
/// the duration of the call; without it, it just calls `f`. The criterion
/// bench suite uses this to compare the parallel and sequential paths from
/// one binary.
#[cfg(feature = "parallel")]
pub fn run_sequential<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("single-threaded pool");
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn run_sequential<R>(f: impl FnOnce() -> R) -> R {
    f()
}
