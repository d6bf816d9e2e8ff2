//! Deterministic per-trial generators and a scheduling-independent runner.
//!
//! Every Monte-Carlo trial seeds its own generator from `(seed, trial_index)`,
//! so results do not depend on how trials are distributed across threads.
//! [`map_trials`] returns per-trial outputs in trial order regardless of the
//! thread count, which keeps any downstream aggregation reproducible.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator for one trial, derived from the experiment seed and trial index.
pub fn rng_for_trial(seed: u64, trial: u64) -> Xoshiro256PlusPlus {
    // Distinct (seed, trial) pairs map to distinct stream keys; seed_from_u64
    // then expands the key through SplitMix64 into the full xoshiro state.
    let key = seed ^ (trial.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    Xoshiro256PlusPlus::seed_from_u64(key)
}

pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Runs `f` once per trial index and collects the outputs in trial order.
///
/// With `threads > 1` the index range is split into contiguous chunks, one
/// per worker; outputs are stitched back in order, so the result is identical
/// to the single-threaded run.
pub fn map_trials<T, F>(trials: u64, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let threads = threads.max(1);
    if threads == 1 || trials < 2 {
        return (0..trials).map(f).collect();
    }

    let chunk = trials.div_ceil(threads as u64);
    let mut out: Vec<Vec<T>> = Vec::new();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for w in 0..threads as u64 {
            let start = w * chunk;
            let end = ((w + 1) * chunk).min(trials);
            if start >= end {
                break;
            }
            let f = &f;
            handles.push(scope.spawn(move || (start..end).map(f).collect::<Vec<T>>()));
        }
        for handle in handles {
            out.push(handle.join().expect("trial worker panicked"));
        }
    });
    out.into_iter().flatten().collect()
}
