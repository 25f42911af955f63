//! Replicate-level parallelism with order-preserving collection, so that
//! sequential reductions over the results do not depend on the worker count.

use rayon::prelude::*;

/// Evaluates `f` on `0..n` in parallel and returns the results in index order.
pub fn map_samples<T, F>(n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Fallible variant of [`map_samples`]; the first error in index order wins.
pub fn try_map_samples<T, E, F>(n: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map_samples(n, f).into_iter().collect()
}

/// Runs `op` on a dedicated pool with `workers` threads.
pub fn with_workers<R: Send>(workers: usize, op: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool")
        .install(op)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_for_any_worker_count() {
        let base: Vec<u64> = (0..1000).map(|i| i * i).collect();
        for w in [1, 3, 8] {
            assert_eq!(with_workers(w, || map_samples(1000, |i| i * i)), base);
        }
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<u64>, u64> =
            try_map_samples(100, |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(29));
    }
}
