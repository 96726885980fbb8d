//! Deterministic trial-parallel Monte Carlo.
//!
//! Trial `i` always draws from `ChaCha8` seeded with the run seed and switched
//! to stream `i`, and results are collected in trial order, so aggregates do
//! not depend on the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `f(trial, rng)` for every trial on `workers` threads (0 = rayon default).
pub fn run_trials<T, F>(seed: u64, trials: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut TrialRng) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numerical(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| f(i, &mut trial_rng(seed, i)))
            .collect()
    }))
}

/// Like [`run_trials`] for fallible trials; the first error in trial order wins.
pub fn try_run_trials<T, F>(seed: u64, trials: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut TrialRng) -> Result<T> + Sync + Send,
{
    run_trials(seed, trials, workers, f)?.into_iter().collect()
}
