//! Multi-threaded chunk executor.

use std::num::NonZeroUsize;

use graphing_core::Executor;

/// Environment variable holding the worker count.
pub const THREADS_VAR: &str = "GRAPHING_LAB_THREADS";

/// Runs chunks on scoped threads; worker `w` takes chunks `w, w + T, ...`.
///
/// Results come back in chunk order, so sums over them do not depend on the
/// worker count.
#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    threads: usize,
}

impl Threaded {
    pub fn new(threads: usize) -> Self {
        Threaded { threads: threads.max(1) }
    }

    /// Worker count from `GRAPHING_LAB_THREADS`, else the available parallelism.
    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_VAR)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&t| t > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, NonZeroUsize::get));
        Threaded::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.threads
    }
}

impl Executor for Threaded {
    fn run<T, F>(&self, chunks: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let workers = self.threads.min(chunks);
        if workers <= 1 {
            return (0..chunks).map(job).collect();
        }
        let mut slots: Vec<Option<T>> = (0..chunks).map(|_| None).collect();
        std::thread::scope(|scope| {
            let job = &job;
            let handles: Vec<_> = (0..workers)
                .map(|w| scope.spawn(move || (w..chunks).step_by(workers).map(|c| (c, job(c))).collect::<Vec<_>>()))
                .collect();
            for handle in handles {
                match handle.join() {
                    Ok(done) => {
                        for (c, v) in done {
                            slots[c] = Some(v);
                        }
                    }
                    Err(panic) => std::panic::resume_unwind(panic),
                }
            }
        });
        slots.into_iter().map(|v| v.expect("every chunk is assigned to a worker")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphing_core::Sequential;

    #[test]
    fn results_are_in_chunk_order() {
        for threads in [1, 2, 3, 8] {
            let out = Threaded::new(threads).run(37, |c| c * c);
            assert_eq!(out, Sequential.run(37, |c| c * c));
        }
    }

    #[test]
    fn zero_chunks() {
        assert!(Threaded::new(4).run(0, |c| c).is_empty());
    }
}
