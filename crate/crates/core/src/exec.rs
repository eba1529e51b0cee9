//! Execution strategy for the data-parallel kernels.
//!
//! With the `parallel` feature (default) the [`Exec::Parallel`] strategy runs
//! on rayon; without it every strategy degrades to a plain sequential loop.
//! Both strategies produce bit-identical results: each item is computed
//! independently and results are collected in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when this strategy will actually fan out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Map `f` over `0..n`, returning results in index order.
pub fn map_indices<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Apply `f` to consecutive `chunk`-sized mutable slices, passing the chunk
/// index. Used for row-wise lattice kernels.
pub fn for_each_chunk_mut<T, F>(exec: Exec, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    let _ = exec;
    for (i, c) in data.chunks_mut(chunk).enumerate() {
        f(i, c);
    }
}

/// Run `f` inside a pool of at most `workers` threads. `workers <= 1` runs on
/// the calling thread.
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce(Exec) -> R + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => return pool.install(|| f(Exec::Parallel)),
            Err(e) => log::warn!("falling back to sequential execution: {e}"),
        }
    }
    let _ = workers;
    f(Exec::Sequential)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let seq = map_indices(Exec::Sequential, 100, |i| i * i);
        let par = map_indices(Exec::Parallel, 100, |i| i * i);
        assert_eq!(seq, par);
    }

    #[test]
    fn chunks_see_their_index() {
        let mut v = vec![0usize; 12];
        for_each_chunk_mut(Exec::Parallel, &mut v, 4, |i, c| c.fill(i));
        assert_eq!(v, [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2]);
    }

    #[test]
    fn single_worker_is_sequential() {
        assert_eq!(with_workers(1, |e| e), Exec::Sequential);
    }
}
