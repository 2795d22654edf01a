//! Data-parallel map over independent runs.
//!
//! With the `parallel` feature (on by default) the work runs on a rayon
//! pool; without it, or with [`Execution::Sequential`], it is a plain loop.
//! Results come back in index order either way, so output never depends on
//! scheduling.

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "FPR_WORKERS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Up to `workers` threads (all cores when `None`), further capped by
    /// `FPR_WORKERS`.
    #[default]
    Parallel,
    ParallelWith { workers: usize },
}

impl Execution {
    pub fn with_workers(workers: Option<usize>) -> Self {
        match workers {
            Some(1) => Execution::Sequential,
            Some(w) => Execution::ParallelWith { workers: w },
            None => Execution::Parallel,
        }
    }

    /// Thread count this execution would use, after the environment cap.
    pub fn threads(self) -> usize {
        let env_cap = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&w| w > 0);
        let requested = match self {
            Execution::Sequential => return 1,
            Execution::Parallel => available(),
            Execution::ParallelWith { workers } => workers.max(1),
        };
        env_cap.map_or(requested, |cap| requested.min(cap))
    }
}

fn available() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// `(0..count).map(f).collect()`, possibly in parallel.
pub fn map_indexed<T, F>(count: usize, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let threads = execution.threads();
    if threads <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    run_parallel(count, threads, f)
}

#[cfg(feature = "parallel")]
fn run_parallel<T, F>(count: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_parallel<T, F>(count: usize, _threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_keep_index_order() {
        let seq = map_indexed(100, Execution::Sequential, |i| i * i);
        let par = map_indexed(100, Execution::ParallelWith { workers: 4 }, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }

    #[test]
    fn worker_selection() {
        assert_eq!(Execution::with_workers(Some(1)), Execution::Sequential);
        assert_eq!(Execution::Sequential.threads(), 1);
        assert!(Execution::Parallel.threads() >= 1);
    }
}
