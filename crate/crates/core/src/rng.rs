//! Per-trial random streams derived from one base seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent stream for `trial`; identical for any scheduling of trials.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// The seed recorded in CSV rows for a trial.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    use rand::RngCore;
    trial_rng(seed, trial).next_u64()
}
