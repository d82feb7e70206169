//! Data-parallel helpers.
//!
//! Every sweep in the crate (spectral grids, contour pieces, parameter
//! scans) goes through [`map`]. With the `parallel` feature the work is
//! spread over the rayon pool; without it the same closures run in order.
//! Results are always returned in input order so reductions stay
//! deterministic regardless of the backend.

use std::sync::atomic::{AtomicU8, Ordering};

/// Execution backend for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

const UNSET: u8 = 0;
const SEQ: u8 = 1;
const PAR: u8 = 2;

static OVERRIDE: AtomicU8 = AtomicU8::new(UNSET);

/// Backend used by [`map`] unless overridden.
pub fn current() -> Exec {
    match OVERRIDE.load(Ordering::Relaxed) {
        SEQ => Exec::Sequential,
        _ if cfg!(feature = "parallel") => Exec::Parallel,
        _ => Exec::Sequential,
    }
}

/// Force a backend process-wide. Requesting `Parallel` without the
/// `parallel` feature silently stays sequential.
pub fn set(exec: Exec) {
    let v = match exec {
        Exec::Sequential => SEQ,
        Exec::Parallel => PAR,
    };
    OVERRIDE.store(v, Ordering::Relaxed);
}

/// Map `f` over `items`, preserving order.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    map_with(current(), items, f)
}

/// Map with an explicit backend.
pub fn map_with<T, U, F>(exec: Exec, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Map over `0..n`.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    map(&idx, |&i| f(i))
}

/// Map a fallible closure and collect into a single `Result`, reporting the
/// first error in input order.
pub fn try_map<T, U, E, F>(items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    map(items, f).into_iter().collect()
}
