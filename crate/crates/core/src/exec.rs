//! Sequential/parallel execution switch.
//!
//! Data-parallel inner loops (K-means restarts, per-router subproblems,
//! independent DP subtrees and table rows) run on rayon when the `parallel`
//! feature is enabled and the caller asks for it. Every parallel site
//! reduces in a fixed order, so results are identical to the sequential
//! path bit for bit. Without the feature, `Exec::Par` degrades to
//! sequential execution.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution mode threaded through solver entry points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Exec {
    /// Parallel when the feature is compiled in and more than one rayon
    /// thread is available, sequential otherwise.
    pub fn auto() -> Exec {
        #[cfg(feature = "parallel")]
        {
            if rayon::current_num_threads() > 1 {
                return Exec::Parallel;
            }
        }
        Exec::Sequential
    }

    pub fn is_parallel(self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self == Exec::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }
}

impl Default for Exec {
    fn default() -> Self {
        Exec::auto()
    }
}

/// Configure the global thread pool for `threads` workers and return the
/// matching mode. One thread (the default) means strictly sequential
/// execution; without the `parallel` feature any request degrades to
/// sequential.
pub fn configure_threads(threads: usize) -> Exec {
    #[cfg(feature = "parallel")]
    if threads > 1 {
        // Ignore the error from configuring twice; the pool size sticks
        // from the first call.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        return Exec::Parallel;
    }
    let _ = threads;
    Exec::Sequential
}

/// Map over an index range, in parallel when requested. Output order is by
/// index either way.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
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

/// Run two closures, concurrently when requested, returning both results.
pub fn join<A, B, RA, RB>(exec: Exec, a: A, b: B) -> (RA, RB)
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
