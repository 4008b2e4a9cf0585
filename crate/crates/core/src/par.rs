//! Parallel dispatch helpers.
//!
//! With the `parallel` feature (default) row-sized work items fan out over
//! rayon; without it the same closures run sequentially. Callers must keep
//! per-item work independent so both paths produce identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Cap the global thread pool. `None` leaves rayon's default. Calling this
/// after the pool already exists is a no-op.
pub fn configure_threads(limit: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = limit {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = limit;
}

/// Run `f` on a dedicated pool with `threads` workers (sequentially when the
/// `parallel` feature is off). Used by benchmarks to compare scaling.
pub fn run_with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("thread pool")
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Map `0..len` to a vector, one item per index.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Apply `f(chunk_index, chunk)` over disjoint chunks of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
}
