//! Seeded, chunked sampling.
//!
//! Sample `i` of a run belongs to chunk `i / CHUNK` and is drawn from a ChaCha
//! stream selected by the chunk index, so every sample is a function of the
//! seed and its position alone. Executors evaluate chunks in any order and
//! hand the results back in chunk order, so totals never depend on how many
//! workers ran.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Samples per chunk.
pub const CHUNK: usize = 1024;

/// Runs independent chunk jobs and returns their results in chunk order.
pub trait Executor: Sync {
    fn run<T, F>(&self, chunks: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs every chunk on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn run<T, F>(&self, chunks: usize, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..chunks).map(job).collect()
    }
}

/// Random stream for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Number of chunks covering `n` samples and the size of chunk `c`.
pub fn chunk_count(n: usize) -> usize {
    n.div_ceil(CHUNK)
}

pub fn chunk_len(n: usize, c: usize) -> usize {
    CHUNK.min(n - c * CHUNK)
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / total;
        self.count += other.count;
    }

    /// Sample variance with Bessel's correction; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        libm::sqrt(self.variance() / self.count as f64)
    }
}

/// Merges per-chunk moments in chunk order.
pub fn merge_all<'a>(parts: impl IntoIterator<Item = &'a Moments>) -> Moments {
    let mut total = Moments::default();
    for p in parts {
        total.merge(p);
    }
    total
}
