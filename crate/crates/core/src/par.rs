//! Order-preserving batch execution, parallel when the `parallel` feature is on.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[default]
    Sequential,
    /// `threads == 0` uses every available core.
    Parallel { threads: usize },
}

impl Exec {
    /// `jobs <= 1` is sequential; `jobs == 0` is treated as "all cores".
    pub fn from_jobs(jobs: usize) -> Exec {
        match jobs {
            1 => Exec::Sequential,
            n => Exec::Parallel { threads: n },
        }
    }
}

/// `f(index, item)` for every item, results in input order.
pub fn map_indexed<T, U, F>(items: &[T], exec: Exec, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    match exec {
        Exec::Sequential => items.iter().enumerate().map(|(i, x)| f(i, x)).collect(),
        Exec::Parallel { threads } => parallel(items, threads, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel<T, U, F>(items: &[T], threads: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    let run = || items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect();
    if threads == 0 {
        return run();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel<T, U, F>(items: &[T], _threads: usize, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}
