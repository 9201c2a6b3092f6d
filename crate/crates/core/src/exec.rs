//! Execution-mode plumbing: every exhaustive scan in this crate can run
//! either sequentially or data-parallel over rayon. The `parallel` feature
//! controls whether rayon is compiled in at all; without it `Parallel`
//! silently degrades to the sequential path, so callers never need cfg's.
//!
//! All parallel searches use `find_map_first`-style semantics: the returned
//! witness is the one the sequential scan would find, so verdicts and
//! witnesses are byte-identical across modes and thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        matches!(self, ExecMode::Parallel) && cfg!(feature = "parallel")
    }
}

/// Scan `0..count`, returning the first `Some` produced by `f` (first in
/// index order, regardless of mode). The index space is sharded into chunks
/// so rayon can steal work without per-index overhead.
pub fn find_map_indexed<T, F>(mode: ExecMode, count: u64, f: F) -> Option<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync,
{
    if count == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && count > 1024 {
        let chunk = (count / (rayon::current_num_threads() as u64 * 8)).clamp(256, 1 << 16);
        let chunks = count.div_ceil(chunk);
        return (0..chunks).into_par_iter().find_map_first(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(count);
            (lo..hi).find_map(&f)
        });
    }
    let _ = mode;
    (0..count).find_map(f)
}

/// Map `f` over `0..count` collecting all results, parallel when allowed.
pub fn map_indexed<T, F>(mode: ExecMode, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && count > 8 {
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..count).map(f).collect()
}

/// First item of `items` (in order) for which `f` returns `Some`.
pub fn find_map_slice<'a, I, T, F>(mode: ExecMode, items: &'a [I], f: F) -> Option<T>
where
    I: Sync,
    T: Send,
    F: Fn(&'a I) -> Option<T> + Sync,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() && items.len() > 16 {
        return items.par_iter().find_map_first(&f);
    }
    let _ = mode;
    items.iter().find_map(f)
}
