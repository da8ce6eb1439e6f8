//! Execution strategy for the data-parallel loops (Monte Carlo sampling,
//! corpus sweeps, constraint assembly).
//!
//! With the `parallel` feature the loops run on the rayon pool; without it
//! every strategy falls back to a plain sequential loop. Reductions always use
//! the same fixed chunking and pairwise tree, so sequential and parallel runs
//! produce bit-identical sums.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::CMat;

/// Samples summed sequentially inside one reduction chunk.
pub const CHUNK: usize = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Parallel when the `parallel` feature is enabled.
    #[default]
    Auto,
    Sequential,
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && !matches!(self, Execution::Sequential)
    }
}

/// Ordered map over `0..n`.
pub fn map_range<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Ordered map over a slice.
pub fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Run two closures, concurrently when allowed.
pub fn join<A, B, RA, RB>(exec: Execution, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return rayon::join(a, b);
    }
    let _ = exec;
    (a(), b())
}

/// Pairwise (balanced tree) reduction of `parts` in index order.
pub fn pairwise_sum(mut parts: Vec<CMat>) -> Option<CMat> {
    if parts.is_empty() {
        return None;
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}

/// `sum_{i < n} term(i)`, evaluated in fixed chunks of [`CHUNK`] terms that are
/// combined pairwise. The result does not depend on the execution strategy.
pub fn chunked_sum<F>(exec: Execution, n: usize, rows: usize, cols: usize, term: F) -> CMat
where
    F: Fn(usize) -> CMat + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partials = map_range(exec, chunks, |c| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(n);
        let mut acc = CMat::zeros(rows, cols);
        for i in start..end {
            acc += term(i);
        }
        acc
    });
    pairwise_sum(partials).unwrap_or_else(|| CMat::zeros(rows, cols))
}
