//! Seeded random streams and batched Monte Carlo.
//!
//! Work is cut into fixed-size batches and batch `i` always draws from
//! ChaCha stream `i` of the schedule's seed, so results do not depend on the
//! number of worker threads. Batch results are reduced in batch order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Draws per Monte Carlo batch.
pub const BATCH_SIZE: usize = 4096;

/// A root seed from which independent streams and sub-schedules are derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedSchedule {
    seed: u64,
}

impl SeedSchedule {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream number `index` of this seed.
    pub fn stream(&self, index: u64) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// An independent schedule labelled by `label`.
    pub fn derive(&self, label: &str) -> SeedSchedule {
        // FNV-1a over the label, then a splitmix64 finaliser.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        SeedSchedule::new(splitmix64(self.seed ^ h))
    }

    pub fn derive_index(&self, index: u64) -> SeedSchedule {
        SeedSchedule::new(splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x9e37_79b9))))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs `work(stream, count)` over `total` draws split into batches and
/// returns the per-batch results in batch order.
pub fn run_batches<A, F>(schedule: &SeedSchedule, total: usize, work: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut Stream, usize) -> A + Sync + Send,
{
    let batches = total.div_ceil(BATCH_SIZE);
    let job = |b: usize| {
        let count = BATCH_SIZE.min(total - b * BATCH_SIZE);
        let mut rng = schedule.stream(b as u64);
        work(&mut rng, count)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..batches).into_par_iter().map(job).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..batches).map(job).collect()
    }
}

/// `items.map(f)` in order, fanned out over worker threads when available.
pub fn map_ordered<T, A, F>(items: &[T], f: F) -> Vec<A>
where
    T: Sync,
    A: Send,
    F: Fn(&T) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Running first and second moments of a scalar statistic.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanAccumulator {
    n: u64,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        self.n += other.n;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.sum.value() / self.n as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let m = self.mean();
        ((self.sum_sq.value() - n * m * m) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}
