//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these fan out over rayon's global
//! pool; without it they run sequentially. Either way results come back in
//! index order, so any reduction the caller performs afterwards is in a fixed
//! order and the output is bit-identical between the two builds.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f` on every index of `range` and collects the results in order.
#[cfg(feature = "parallel")]
pub fn map_range<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    range.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<T, F>(range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    range.map(f).collect()
}

/// Same as [`map_range`] for fallible closures; the first error in index
/// order wins.
pub fn try_map_range<T, E, F>(range: Range<usize>, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_range(range, f).into_iter().collect()
}

/// Maps over a slice, preserving order.
#[cfg(feature = "parallel")]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    items.iter().map(f).collect()
}
