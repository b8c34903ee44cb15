//! Data-parallel loop helpers.
//!
//! Every helper returns results in index order, so callers see the same
//! output whether the `parallel` feature is enabled or not.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(i)` for `i in 0..n`, collecting in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Like [`map_range`], but hands each call a scratch value created by `init`.
///
/// The scratch value is reused across indices in unspecified order; `f` must
/// fully reinitialize whatever part of it the result depends on.
pub fn map_range_with<S, T, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map_init(init, f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        (0..n).map(|i| f(&mut scratch, i)).collect()
    }
}

/// Counts the indices in `0..n` for which `pred` holds.
pub fn count_range<S, I, P>(n: usize, init: I, pred: P) -> u64
where
    I: Fn() -> S + Sync + Send,
    P: Fn(&mut S, usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map_init(init, |s, i| u64::from(pred(s, i)))
            .sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = init();
        (0..n).map(|i| u64::from(pred(&mut scratch, i))).sum()
    }
}

/// Maps a slice element-wise, preserving order.
pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Whether the rayon-backed path is compiled in.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
