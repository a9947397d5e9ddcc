//! Selection algorithms under a cardinality bound.
//!
//! - [`greedy`], [`lazy_greedy`], [`stochastic_greedy`] and the exhaustive
//!   [`brute_force`] maximize a single set function.
//! - [`saturate_with_preference`] and [`ssa`] target the max-min of a task
//!   family by bisection over saturation levels.
//! - [`online_tr_driver`] plays window-robust solutions over a stream of objectives.
//!
//! Every solver breaks ties by the lowest element index, so a run is fully
//! determined by its instance, configuration and seed.

mod greedy;
mod online;
mod saturate;

pub use greedy::{brute_force, greedy, lazy_greedy, stochastic_greedy, BRUTE_FORCE_BUDGET};
pub use online::{online_per_step, online_tr_driver, OnlineConfig, OnlineStep, WindowFamily};
pub use saturate::{
    greedy_partial_cover, saturate_with_preference, saturation_trace, ssa, ssa_to_resolution, BisectionStep, Cover,
    CoverStrategy, SaturationConfig, TruncatedMean, SATURATION_SLACK,
};

use crate::subset::Subset;

/// Outcome of one solver invocation.
#[derive(Clone, Debug)]
pub struct SolverResult {
    pub selection: Subset,
    /// Elements in the order they were added.
    pub order: Vec<usize>,
    pub objective_value: f64,
    /// Number of oracle evaluations.
    pub evaluations: u64,
    /// Seconds spent inside the solver.
    pub wall_time: f64,
    pub seed: u64,
}

/// Per-round sample size of stochastic greedy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleSize {
    /// `ceil(|N| / K * ln(1 / epsilon))`
    Epsilon(f64),
    /// A fixed number of candidates per round.
    Fixed(usize),
}

impl SampleSize {
    pub fn per_round(&self, ground_size: usize, k: usize) -> usize {
        match *self {
            SampleSize::Epsilon(eps) => {
                let r = (ground_size as f64 / k.max(1) as f64 * (1.0 / eps).ln()).ceil();
                r.max(1.0) as usize
            }
            SampleSize::Fixed(r) => r.max(1),
        }
    }
}

/// Mixes a base seed with a stream tag into an independent 64-bit seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(base ^ splitmix(stream))
}
