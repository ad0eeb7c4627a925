//! Deterministic fan-out of independent jobs.
//!
//! Results always come back in input order, so anything assembled from
//! them is independent of the worker count and the schedule.

use std::sync::Arc;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

use crate::error::Result;

#[derive(Clone)]
pub struct Pool {
    workers: usize,
    inner: Option<Arc<ThreadPool>>,
}

impl std::fmt::Debug for Pool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pool").field("workers", &self.workers).finish()
    }
}

impl Pool {
    /// `workers = 0` uses the available parallelism; `1` runs serially on
    /// the calling thread.
    pub fn new(workers: usize) -> Self {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        } else {
            workers
        };
        let inner = (workers > 1).then(|| {
            Arc::new(
                ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .expect("thread pool"),
            )
        });
        Self { workers, inner }
    }

    pub fn serial() -> Self {
        Self::new(1)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match &self.inner {
            None => items.iter().map(f).collect(),
            Some(pool) => pool.install(|| items.par_iter().map(f).collect()),
        }
    }

    /// Like [`Pool::map`]; the first error in input order wins.
    pub fn try_map<T, R, F>(&self, items: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Result<R> + Sync + Send,
    {
        self.map(items, f).into_iter().collect()
    }
}

impl Default for Pool {
    fn default() -> Self {
        Self::new(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn order_is_preserved() {
        let items: Vec<u64> = (0..200).collect();
        let serial = Pool::serial().map(&items, |x| x * x);
        let par = Pool::new(4).map(&items, |x| x * x);
        assert_eq!(serial, par);
    }

    #[test]
    fn first_error_in_order() {
        let items: Vec<i32> = (0..50).collect();
        let r = Pool::new(3).try_map(&items, |&x| {
            if x % 20 == 7 {
                Err(Error::Empty(format!("{x}")))
            } else {
                Ok(x)
            }
        });
        assert_eq!(r, Err(Error::Empty("7".into())));
    }
}
