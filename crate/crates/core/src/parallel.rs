//! Seeded random streams and sharded Monte Carlo reduction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::stats::RunningStats;

/// The crate's reproducible generator.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` derived from `seed`.
pub fn substream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `n` draws split across `shards` independent streams and merges the
/// accumulators. The result depends on `shards` but not on thread scheduling.
pub fn sharded_stats<F>(seed: u64, n: u64, shards: usize, draw: F) -> RunningStats
where
    F: Fn(&mut SimRng) -> f64 + Sync,
{
    let shards = shards.max(1) as u64;
    let parts: Vec<RunningStats> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let count = n / shards + u64::from(k < n % shards);
            let mut rng = substream(seed, k + 1);
            (0..count).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut total = RunningStats::new();
    for p in &parts {
        total.merge(p);
    }
    total
}
