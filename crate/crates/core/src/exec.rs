//! Serial or data-parallel execution of independent indexed jobs.
//!
//! Results are always returned in index order, so any fold over them is
//! independent of scheduling. Without the `parallel` feature every schedule
//! runs serially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Schedule {
    Serial,
    /// Parallel on the ambient rayon pool (or a dedicated pool of
    /// `threads` workers when set).
    #[default]
    Parallel,
    Threads(usize),
}

impl Schedule {
    /// `jobs == 1` is serial; `None` uses every available core.
    pub fn from_jobs(jobs: Option<usize>) -> Self {
        match jobs {
            Some(1) => Self::Serial,
            Some(n) if n > 1 => Self::Threads(n),
            _ => Self::Parallel,
        }
    }

    pub fn is_serial(self) -> bool {
        matches!(self, Self::Serial) || !cfg!(feature = "parallel")
    }

    /// Runs `f` inside the pool this schedule asks for.
    pub fn install<T: Send>(self, f: impl FnOnce() -> T + Send) -> T {
        #[cfg(feature = "parallel")]
        if let Self::Threads(n) = self {
            match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => return pool.install(f),
                Err(_) => return f(),
            }
        }
        f()
    }

    /// `(0..len).map(f)` collected in index order.
    pub fn map<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if !self.is_serial() {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }
}
