//! Deterministic data-parallel reductions.
//!
//! Rows are split into fixed-size chunks independent of the worker count.
//! Each chunk is folded sequentially and the chunk partials are merged in
//! chunk order, so the result is bitwise identical for any thread pool.

use rayon::prelude::*;

/// Rows per reduction chunk.
pub const CHUNK_ROWS: usize = 1024;

pub fn chunked_reduce<T, I, F, M>(n: usize, init: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, usize) + Sync,
    M: Fn(&mut T, T),
{
    let num_chunks = n.div_ceil(CHUNK_ROWS);
    let partials: Vec<T> = (0..num_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = init();
            let end = ((chunk + 1) * CHUNK_ROWS).min(n);
            for i in chunk * CHUNK_ROWS..end {
                fold(&mut acc, i);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in partials {
        merge(&mut total, p);
    }
    total
}

pub fn chunked_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    chunked_reduce(n, || 0.0, |acc, i| *acc += term(i), |acc, p| *acc += p)
}
