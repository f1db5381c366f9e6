//! Row-parallel evaluation with results identical to sequential order.
//!
//! Every pixel is computed by the same closure regardless of scheduling, so
//! parallel and sequential runs are bit-identical. Vote accumulators are
//! summed per partition, which is exact for integer counts.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

static SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Forces every kernel in the crate onto the calling thread.
pub fn set_sequential(sequential: bool) {
    SEQUENTIAL.store(sequential, Ordering::Relaxed);
}

pub fn is_sequential() -> bool {
    SEQUENTIAL.load(Ordering::Relaxed)
}

/// Fills a row-major buffer by calling `row(y, out_row)` for every row.
pub(crate) fn fill_rows<T, F>(width: usize, height: usize, row: F) -> Vec<T>
where
    T: Default + Clone + Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let mut out = vec![T::default(); width * height];
    if is_sequential() || height < 2 {
        out.chunks_mut(width)
            .enumerate()
            .for_each(|(y, r)| row(y, r));
    } else {
        out.par_chunks_mut(width)
            .enumerate()
            .for_each(|(y, r)| row(y, r));
    }
    out
}

/// Votes `items` into a `len`-bin histogram. Each partition fills its own
/// buffer through `vote`; the buffers are then summed bin by bin.
pub(crate) fn accumulate<T, F>(items: &[T], len: usize, vote: F) -> Vec<u64>
where
    T: Sync,
    F: Fn(&T, &mut [u64]) + Sync + Send,
{
    const CHUNK: usize = 256;
    if is_sequential() || items.len() <= CHUNK {
        let mut acc = vec![0u64; len];
        items.iter().for_each(|it| vote(it, &mut acc));
        return acc;
    }
    items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0u64; len];
            chunk.iter().for_each(|it| vote(it, &mut acc));
            acc
        })
        .reduce(
            || vec![0u64; len],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
}
