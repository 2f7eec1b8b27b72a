use dyadic_core::energy::JobRunner;
use rayon::prelude::*;

/// Worker count: explicit value, then `DYADIC_WORKERS`, then the machine's parallelism.
pub fn worker_count(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var("DYADIC_WORKERS").ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub struct PoolRunner {
    pool: rayon::ThreadPool,
}

impl PoolRunner {
    pub fn new(workers: usize) -> anyhow::Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build()?;
        Ok(PoolRunner { pool })
    }
}

impl JobRunner for PoolRunner {
    fn run<T, R, F>(&self, jobs: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        // Indexed collect keeps job order, so results do not depend on scheduling.
        self.pool.install(|| jobs.into_par_iter().map(f).collect())
    }
}
