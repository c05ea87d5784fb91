//! Worker pool and order-preserving parallel maps over ensemble members.

use anyhow::{Context, Result};
use rayon::prelude::*;
use rayon::ThreadPool;

pub use lqg_core::rng::member_seed;

/// A pool with `threads` workers, or one per core when `None` or zero.
pub fn pool(threads: Option<usize>) -> Result<ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.filter(|&t| t > 0) {
        b = b.num_threads(t);
    }
    b.build().context("building worker pool")
}

/// `f(k)` for `k` in `0..count`, in index order regardless of scheduling.
pub fn map_indexed<T, F>(pool: &ThreadPool, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Like [`map_indexed`] for fallible work; the first error in index order wins.
pub fn try_map_indexed<T, F>(pool: &ThreadPool, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(pool, count, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_does_not_depend_on_threads() {
        let one = map_indexed(&pool(Some(1)).unwrap(), 100, |k| member_seed(9, k as u64));
        let four = map_indexed(&pool(Some(4)).unwrap(), 100, |k| member_seed(9, k as u64));
        assert_eq!(one, four);
    }
}
