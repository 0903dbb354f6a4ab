//! Execution mode for data-parallel loops.
//!
//! With the `parallel` feature the [`Execution::Parallel`] mode maps work onto
//! the current rayon pool; without it every mode runs sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Sums `f(i)` over `0..n`. The sum is exact so the result does not
    /// depend on scheduling.
    pub fn sum_u64<F>(self, n: u64, f: F) -> u64
    where
        F: Fn(u64) -> u64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).sum();
        }
        (0..n).map(f).sum()
    }

    /// Like [`Execution::sum_u64`] for fallible work. On failure the error
    /// from the lowest failing index is returned, whatever the scheduling.
    pub fn try_sum_u64<E, F>(self, n: u64, f: F) -> Result<u64, E>
    where
        E: Send,
        F: Fn(u64) -> Result<u64, E> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            let lift = |i: u64| match f(i) {
                Ok(v) => (v, None),
                Err(e) => (0, Some((i, e))),
            };
            let merge = |a: (u64, Option<(u64, E)>), b: (u64, Option<(u64, E)>)| {
                let err = match (a.1, b.1) {
                    (Some(x), Some(y)) => Some(if x.0 <= y.0 { x } else { y }),
                    (x, y) => x.or(y),
                };
                (a.0 + b.0, err)
            };
            let (sum, err) = (0..n).into_par_iter().map(lift).reduce(|| (0, None), merge);
            return match err {
                Some((_, e)) => Err(e),
                None => Ok(sum),
            };
        }
        let mut sum = 0;
        for i in 0..n {
            sum += f(i)?;
        }
        Ok(sum)
    }

    /// Maps `f` over `0..n` and collects the results in index order.
    pub fn map_collect<T, F>(self, n: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Maps `f` over a slice, preserving order.
    pub fn map_slice<I, T, F>(self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}
