//! Replicate-parallel execution with a deterministic reduction.
//!
//! Replicates are cut into fixed-size chunks. Each chunk is evaluated
//! independently and the per-chunk accumulators are merged in chunk order,
//! so a fixed seed yields bit-identical output for any worker count.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::BlackBox;

/// Replicates per chunk; also the batch size handed to [`BlackBox::eval_batch`].
pub const CHUNK: usize = 2048;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Count, compensated mean and Welford second moment of a stream.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunningStats {
    count: u64,
    sum: CompensatedSum,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum.add(x);
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / n as f64;
        self.sum.merge(&other.sum);
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Compensated-sum mean.
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum.value() / self.count as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Worker-count configuration for estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Executor {
    workers: usize,
}

impl Default for Executor {
    fn default() -> Self {
        let workers = std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1);
        Executor { workers }
    }
}

impl Executor {
    pub fn new(workers: usize) -> Self {
        Executor {
            workers: workers.max(1),
        }
    }

    pub fn serial() -> Self {
        Executor { workers: 1 }
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `chunk_fn` over `0..n` in chunks of [`CHUNK`] replicates and
    /// merges the `K` accumulators in chunk order.
    pub(crate) fn run<const K: usize, F>(&self, n: usize, chunk_fn: F) -> Result<[RunningStats; K]>
    where
        F: Fn(Range<usize>) -> Result<[RunningStats; K]> + Sync,
    {
        let chunks = n.div_ceil(CHUNK);
        let range = |c: usize| c * CHUNK..((c + 1) * CHUNK).min(n);
        let parts: Vec<[RunningStats; K]> = if self.workers == 1 || chunks <= 1 {
            (0..chunks).map(|c| chunk_fn(range(c))).collect::<Result<_>>()?
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.workers)
                .build()
                .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
            pool.install(|| {
                (0..chunks)
                    .into_par_iter()
                    .map(|c| chunk_fn(range(c)))
                    .collect::<Result<Vec<_>>>()
            })?
        };
        let mut total = [RunningStats::default(); K];
        for part in &parts {
            for (t, p) in total.iter_mut().zip(part) {
                t.merge(p);
            }
        }
        Ok(total)
    }
}

/// Evaluates a batch of points and rejects non-finite values.
pub(crate) fn eval_checked(f: &dyn BlackBox, points: &[f64], out: &mut [f64]) -> Result<()> {
    f.eval_batch(points, out)?;
    let d = f.dim();
    if let Some(i) = out.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            value: out[i],
            point: points[i * d..(i + 1) * d].to_vec(),
        });
    }
    Ok(())
}
