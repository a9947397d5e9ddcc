//! LEO constellation sensing simulator.
//!
//! A Walker-Delta constellation flies over a rotating spherical Earth. Each
//! step yields a family of tasks over the satellites: several atmospheric
//! sensing tasks, each tracking Lorenz-63 states at a few ground points with
//! an unscented Kalman filter, plus one area-coverage task.

mod coverage;
mod filter;
mod orbit;
mod scenario;


pub use coverage::CoverageGrid;
pub use filter::{
    fuse_measurements, is_spd, lorenz63_rk4, symmetrize, ukf_step, FilterState, Lorenz63, Ukf, COVARIANCE_JITTER,
};
pub use nalgebra::{Matrix3, Vector3};
pub use orbit::{
    build_constellation, footprint_angle, is_visible, satellite_position, unit_vector, Constellation, GroundPoint,
    Satellite, WalkerDelta, EARTH_MU, EARTH_RADIUS, EARTH_ROTATION_RATE,
};
pub use scenario::{
    coverage_utility, fisher_utility, information_gain, make_satellite_task_family, SatScenario, SatState,
    SatStepFamily, ScenarioConfig,
};
