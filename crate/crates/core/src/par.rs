//! Batch-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) batches run on the rayon pool that
//! is current at the call site; without it they run in order on the calling
//! thread. Either way the output is in batch order, so reductions over it are
//! independent of the worker count.

#[cfg(feature = "parallel")]
pub fn map_batches<T, F>(n_batches: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n_batches).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_batches<T, F>(n_batches: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n_batches).map(f).collect()
}

/// Splits `n` items into fixed-size batches: `(batch index, start, end)`.
pub fn batch_ranges(n: usize, batch: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n.div_ceil(batch)).map(move |b| (b, b * batch, ((b + 1) * batch).min(n)))
}

/// Parallel map over a slice, preserving order.
pub fn map_slice<A, T, F>(items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    const CHUNK: usize = 256;
    map_batches(items.len().div_ceil(CHUNK), |b| {
        items[b * CHUNK..((b + 1) * CHUNK).min(items.len())].iter().map(&f).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect()
}
