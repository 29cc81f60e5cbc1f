//! Execution policy for the data-parallel loops (exhaustive enumeration,
//! per-dimension prompt fan-out). With the `parallel` feature disabled every
//! policy runs sequentially. Results never depend on the policy.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether this policy actually fans out on the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map.
    pub(crate) fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps `0..count` in chunks of `chunk` and folds the per-chunk results
    /// with `reduce`, which must be associative. Chunk results are combined
    /// left to right in the sequential case.
    pub(crate) fn map_reduce_range<R, M, Red>(
        self,
        count: u64,
        chunk: u64,
        identity: R,
        map: M,
        reduce: Red,
    ) -> R
    where
        R: Send + Sync + Clone,
        M: Fn(u64, u64) -> R + Sync + Send,
        Red: Fn(R, R) -> R + Sync + Send,
    {
        let chunk = chunk.max(1);
        let blocks = count.div_ceil(chunk);
        let bounds = move |b: u64| (b * chunk, ((b + 1) * chunk).min(count));
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..blocks)
                .into_par_iter()
                .map(|b| {
                    let (lo, hi) = bounds(b);
                    map(lo, hi)
                })
                .reduce(|| identity.clone(), &reduce);
        }
        (0..blocks).fold(identity, |acc, b| {
            let (lo, hi) = bounds(b);
            reduce(acc, map(lo, hi))
        })
    }
}
