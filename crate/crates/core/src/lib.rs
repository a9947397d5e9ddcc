//! Locally distributionally robust multi-task subset selection.
//!
//! Given tasks `f_1, .., f_n` over a shared ground set and a reference
//! distribution `Q` over tasks, the robust objective
//!
//! ```text
//! G(S) = -lambda * log sum_i Q_i exp(-f_i(S) / lambda)
//! ```
//!
//! is the worst case of `sum_i P_i f_i(S)` over distributions `P` penalized by
//! `lambda * KL(P || Q)`. It is a monotone transform of the submodular
//! surrogate `h(S) = sum_i Q_i (1 - exp(-f_i(S) / lambda))`, so greedy-type
//! solvers apply to it directly.
//!
//! Modules:
//! - [`simplex`]: distributions, KL divergence and the closed-form worst case.
//! - [`objective`]: set functions, task families and aggregate objectives.
//! - [`solver`]: greedy variants, saturation baselines and the online driver.
//! - [`satsim`]: the LEO satellite sensing scenario.
//! - [`imgsum`]: facility-location image summarization.

pub mod error;
pub mod imgsum;
pub mod objective;
pub mod satsim;
pub mod simplex;
pub mod solver;
pub mod subset;

pub use error::{Error, Result};
pub use imgsum::{DistanceMatrix, EmbeddingMatrix, FacilityLocation};
pub use objective::{
    aggregate, aggregate_value, link_g, marginal_gain, normalize_task, surrogate_h, surrogate_h_of, AggregateMode,
    AggregateObjective, SetFunction, SurrogateH, TaskFamily, Tasks,
};
pub use satsim::{SatScenario, SatStepFamily, ScenarioConfig, WalkerDelta};
pub use simplex::{
    geometric_reference, kl_divergence, kl_robust_value, local_worst_case, radius_for_lambda, SimplexDistribution,
};
pub use solver::{SampleSize, SolverResult};

pub use subset::Subset;
