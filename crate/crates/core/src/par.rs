//! Data-parallel helpers. With the `parallel` feature these dispatch to
//! rayon; without it they are plain sequential loops with identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether this build runs data-parallel loops on rayon.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(feature = "parallel")]
pub(crate) fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn map_range<R, F>(range: std::ops::Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_range<R, F>(range: std::ops::Range<usize>, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    range.map(f).collect()
}

/// Maximum of `key(i)` over the range, ties broken towards the smallest index.
#[cfg(feature = "parallel")]
pub(crate) fn max_by_key_range<F>(range: std::ops::Range<usize>, key: F) -> Option<(usize, usize)>
where
    F: Fn(usize) -> usize + Sync + Send,
{
    range
        .into_par_iter()
        .map(|i| (key(i), i))
        .reduce_with(pick_max)
        .map(|(k, i)| (i, k))
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn max_by_key_range<F>(range: std::ops::Range<usize>, key: F) -> Option<(usize, usize)>
where
    F: Fn(usize) -> usize,
{
    range
        .map(|i| (key(i), i))
        .reduce(pick_max)
        .map(|(k, i)| (i, k))
}

fn pick_max(a: (usize, usize), b: (usize, usize)) -> (usize, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}
