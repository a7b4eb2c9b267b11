//! Execution context and the data-parallel helpers used by the enumerators.
//!
//! With the `parallel` feature the helpers run on the ambient rayon pool,
//! otherwise (or when [`Ctx::sequential`] is set) they run on plain iterators.
//! Every helper returns results in index order, so output never depends on
//! the worker count.

use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ctx {
    /// Cap on candidate cochains (or class-set sizes) any single enumeration may visit.
    pub budget: u64,
    /// Force the sequential path even when the `parallel` feature is on.
    pub sequential: bool,
}

impl Default for Ctx {
    fn default() -> Self {
        Ctx { budget: DEFAULT_BUDGET, sequential: false }
    }
}

impl Ctx {
    pub fn with_budget(budget: u64) -> Self {
        Ctx { budget, ..Ctx::default() }
    }

    pub fn sequential() -> Self {
        Ctx { sequential: true, ..Ctx::default() }
    }

    pub fn check(&self, what: &str, needed: u128) -> Result<()> {
        if needed > self.budget as u128 {
            return Err(Error::Resource { what: what.to_string(), needed, budget: self.budget });
        }
        Ok(())
    }

    fn parallel(&self) -> bool {
        cfg!(feature = "parallel") && !self.sequential
    }
}

/// Runs `f` on a pool of `workers` threads; without the `parallel` feature, on the caller.
pub fn with_workers<R, F>(workers: usize, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Unsupported(format!("cannot start {workers} workers: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        Ok(f())
    }
}

/// Indices in `0..n` satisfying `keep`, ascending.
pub fn filter_range<F>(ctx: &Ctx, n: u64, keep: F) -> Vec<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if ctx.parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().filter(|&i| keep(i)).collect();
    }
    let _ = ctx;
    (0..n).filter(|&i| keep(i)).collect()
}

/// `f` applied to every item, in item order.
pub fn map_slice<T, R, F>(ctx: &Ctx, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if ctx.parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = ctx;
    items.iter().map(f).collect()
}

/// `f` applied to every index in `0..n`, in index order.
pub fn map_range<R, F>(ctx: &Ctx, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if ctx.parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = ctx;
    (0..n).map(f).collect()
}

/// First index in `0..n` (lowest) where `bad` holds, if any.
pub fn find_first<F>(ctx: &Ctx, n: usize, bad: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if ctx.parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().find_first(|&i| bad(i));
    }
    let _ = ctx;
    (0..n).find(|&i| bad(i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let par = Ctx::default();
        let seq = Ctx::sequential();
        let keep = |i: u64| i % 7 == 3 || i.is_multiple_of(11);
        assert_eq!(filter_range(&par, 10_000, keep), filter_range(&seq, 10_000, keep));
        let v: Vec<u32> = (0..500).collect();
        assert_eq!(map_slice(&par, &v, |x| x * x), map_slice(&seq, &v, |x| x * x));
        assert_eq!(find_first(&par, 1000, |i| i * i > 5000), Some(71));
    }

    #[test]
    fn budget_is_enforced() {
        let ctx = Ctx::with_budget(10);
        assert!(ctx.check("x", 10).is_ok());
        assert!(matches!(ctx.check("x", 11), Err(Error::Resource { .. })));
    }
}
