//! Simulation of stationary processes with known rank dependence, and the
//! Monte Carlo experiments built on them.
//!
//! Replicate `i` of an experiment with master seed `s` draws from
//! [`replicate_seed`]`(s, i)`. Replicates run in parallel but are collected
//! in index order and reduced sequentially, so reports do not depend on the
//! number of worker threads.

mod experiments;
mod models;
pub mod stats;

pub use experiments::{
    bias_experiment, clt_experiment, BandwidthRule, BiasConfig, BiasReport, BiasRow, CltConfig,
    McReport, OmegaSummary, ZSummary, MIN_CLT_REPS,
};
pub use models::{
    simulate, true_generalized_derivative, true_spectrum, windowed_truth, MarginalTransform,
    SimulationModel, TrueSpectrum, MIN_SIMULATION_LEN,
};

use rayon::prelude::*;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under `master`.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Runs `task(i, seed_i)` for `i < reps` in parallel and returns the results
/// in index order.
pub fn run_replicates<T, F>(reps: usize, master_seed: u64, task: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> crate::Result<T> + Sync,
{
    (0..reps)
        .into_par_iter()
        .map(|i| task(i, replicate_seed(master_seed, i as u64)))
        .collect()
}
