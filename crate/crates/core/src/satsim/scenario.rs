//! The time-stepped sensing scenario and its per-step task family.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::coverage::CoverageGrid;
use super::filter::{fuse_measurements, is_spd, FilterState, Lorenz63, Ukf};
use super::orbit::{build_constellation, is_visible, Constellation, GroundPoint, WalkerDelta};
use crate::error::{domain, Result};
use crate::objective::TaskFamily;
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub constellation: WalkerDelta,
    pub step_seconds: f64,
    pub horizon: usize,
    pub sensing_tasks: usize,
    pub points_per_task: usize,
    pub lorenz: Lorenz63,
    /// Model time advanced per simulation step.
    pub lorenz_dt: f64,
    /// Lorenz steps discarded before the first step so the truth starts on the attractor.
    pub spin_up: usize,
    pub process_noise: f64,
    pub measurement_noise: f64,
    pub initial_variance: f64,
    pub cell_deg: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            constellation: WalkerDelta::pattern(75.0, 240, 12, 1),
            step_seconds: 60.0,
            horizon: 25,
            sensing_tasks: 5,
            points_per_task: 5,
            lorenz: Lorenz63::default(),
            lorenz_dt: 0.01,
            spin_up: 500,
            process_noise: 1e-2,
            measurement_noise: 1.0,
            initial_variance: 1.0,
            cell_deg: 2.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.constellation.validate()?;
        let positive = [
            ("step_seconds", self.step_seconds),
            ("lorenz_dt", self.lorenz_dt),
            ("process_noise", self.process_noise),
            ("measurement_noise", self.measurement_noise),
            ("initial_variance", self.initial_variance),
            ("cell_deg", self.cell_deg),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.horizon == 0 || self.sensing_tasks == 0 || self.points_per_task == 0 {
            return Err(domain("horizon, sensing task count and points per task must be positive"));
        }
        if (180.0 / self.cell_deg).fract().abs() > 1e-9 {
            return Err(domain("cell size must divide 180 degrees"));
        }
        Ok(())
    }
}

/// Ground truth, filters and clock of one simulation run.
///
/// At every step the filters hold the prediction `P_{t|t-1}`; [`SatScenario::advance`]
/// applies the measurements of a selection and predicts the next step.
pub struct SatScenario {
    config: ScenarioConfig,
    constellation: Constellation,
    grid: CoverageGrid,
    ukf: Ukf,
    points: Vec<GroundPoint>,
    truth: Vec<Vector3<f64>>,
    filters: Vec<FilterState>,
    step: usize,
    rng: ChaCha8Rng,
}

impl SatScenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let constellation = build_constellation(config.constellation.clone())?;
        let grid = CoverageGrid::new(config.cell_deg);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut points = Vec::new();
        for task in 0..config.sensing_tasks {
            for _ in 0..config.points_per_task {
                let lat = (2.0 * rng.random::<f64>() - 1.0).asin();
                let lon = PI * (2.0 * rng.random::<f64>() - 1.0);
                points.push(GroundPoint::new(lat, lon, task)?);
            }
        }
        let sd = config.initial_variance.sqrt();
        let mut truth = Vec::with_capacity(points.len());
        let mut filters = Vec::with_capacity(points.len());
        for _ in &points {
            let mut x = Vector3::new(1.0, 1.0, 1.0) + gaussian(&mut rng, 1.0);
            for _ in 0..config.spin_up {
                x = config.lorenz.step(&x, config.lorenz_dt);
            }
            filters.push(FilterState {
                mean: x + gaussian(&mut rng, sd),
                covariance: Matrix3::identity() * config.initial_variance,
            });
            truth.push(x);
        }
        Ok(SatScenario { config, constellation, grid, ukf: Ukf::default(), points, truth, filters, step: 0, rng })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn grid(&self) -> &CoverageGrid {
        &self.grid
    }

    pub fn points(&self) -> &[GroundPoint] {
        &self.points
    }

    pub fn truth(&self) -> &[Vector3<f64>] {
        &self.truth
    }

    /// Current predictions, one per ground point.
    pub fn filters(&self) -> &[FilterState] {
        &self.filters
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.config.constellation.epoch + self.step as f64 * self.config.step_seconds
    }

    /// The task family of the current step over the whole constellation.
    pub fn family(&self) -> SatStepFamily {
        let all: Vec<usize> = (0..self.constellation.len()).collect();
        self.family_for(&all)
    }

    /// The task family of the current step over the listed satellites only;
    /// element `j` of the family is satellite `sats[j]`.
    pub fn family_for(&self, sats: &[usize]) -> SatStepFamily {
        let t = self.time();
        let fov = self.config.constellation.fov_half_angle;
        let positions: Vec<Vector3<f64>> = sats.iter().map(|&s| self.constellation.position(s, t)).collect();
        let point_pos: Vec<Vector3<f64>> = self.points.iter().map(GroundPoint::position).collect();
        let sat_points: Vec<Vec<u32>> = positions
            .iter()
            .map(|s| (0..point_pos.len()).filter(|&p| is_visible(s, &point_pos[p], fov)).map(|p| p as u32).collect())
            .collect();
        let mut seen_by = vec![0usize; self.points.len()];
        for list in &sat_points {
            for &p in list {
                seen_by[p as usize] += 1;
            }
        }
        let r = self.config.measurement_noise;
        let tables: Vec<Vec<f64>> = self
            .filters
            .iter()
            .zip(&seen_by)
            .map(|(f, &full)| (0..=full).map(|m| fisher_utility(&f.covariance, m, full, r)).collect())
            .collect();
        let mut visible_points = vec![0usize; self.config.sensing_tasks];
        for (p, &n) in self.points.iter().zip(&seen_by) {
            if n > 0 {
                visible_points[p.task] += 1;
            }
        }
        let task_scale = visible_points.iter().map(|&v| if v > 0 { 1.0 / v as f64 } else { 0.0 }).collect();
        let sat_cells: Vec<Vec<u32>> = positions.iter().map(|s| self.grid.visible_cells(s, fov)).collect();
        let mut covered = vec![false; self.grid.len()];
        for list in &sat_cells {
            for &c in list {
                covered[c as usize] = true;
            }
        }
        let full_area = (0..self.grid.len()).filter(|&c| covered[c]).map(|c| self.grid.weight(c)).sum();
        SatStepFamily {
            sensing_tasks: self.config.sensing_tasks,
            point_task: self.points.iter().map(|p| p.task).collect(),
            sat_points,
            tables,
            task_scale,
            sat_cells,
            cell_weights: (0..self.grid.len()).map(|c| self.grid.weight(c)).collect(),
            full_area,
        }
    }

    /// Measures every point with the selected satellites that see it, then
    /// advances the truth and predicts the next step.
    pub fn advance(&mut self, measured: &Subset) -> Result<()> {
        if measured.ground_size() != self.constellation.len() {
            return Err(domain("measuring selection must range over the whole constellation"));
        }
        let t = self.time();
        let cfg = &self.config;
        let fov = cfg.constellation.fov_half_angle;
        let positions: Vec<Vector3<f64>> = measured.iter().map(|s| self.constellation.position(s, t)).collect();
        let meas_sd = cfg.measurement_noise.sqrt();
        let proc_sd = cfg.process_noise.sqrt();
        let meas_cov = Matrix3::identity() * cfg.measurement_noise;
        let proc_cov = Matrix3::identity() * cfg.process_noise;
        for p in 0..self.points.len() {
            let pos = self.points[p].position();
            let m = positions.iter().filter(|s| is_visible(s, &pos, fov)).count();
            let z: Vec<Vector3<f64>> = (0..m).map(|_| self.truth[p] + gaussian(&mut self.rng, meas_sd)).collect();
            let posterior = fuse_measurements(&self.ukf, &self.filters[p], &z, &meas_cov)?;
            self.filters[p] = self.ukf.predict(&posterior, |x| cfg.lorenz.step(x, cfg.lorenz_dt), &proc_cov)?;
            self.truth[p] = cfg.lorenz.step(&self.truth[p], cfg.lorenz_dt) + gaussian(&mut self.rng, proc_sd);
        }
        self.step += 1;
        Ok(())
    }

    pub fn covariances_spd(&self) -> bool {
        self.filters.iter().all(|f| is_spd(&f.covariance))
    }
}

fn gaussian(rng: &mut ChaCha8Rng, sd: f64) -> Vector3<f64> {
    let mut draw = || -> f64 { StandardNormal.sample(rng) };
    Vector3::new(draw(), draw(), draw()) * sd
}

/// `Tr(P - F⁻¹)` for `F = P⁻¹ + (m/r) I`, computed as `Tr(P - (I + (m/r) P)⁻¹ P)`.
pub fn information_gain(predicted: &Matrix3<f64>, m: usize, measurement_variance: f64) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let c = m as f64 / measurement_variance;
    let a = Matrix3::identity() + predicted * c;
    match a.lu().solve(predicted) {
        Some(post) => (predicted - post).trace().max(0.0),
        None => 0.0,
    }
}

/// Information gain of `m` measurements relative to that of all `full` available ones.
pub fn fisher_utility(predicted: &Matrix3<f64>, m: usize, full: usize, measurement_variance: f64) -> f64 {
    if full == 0 || m == 0 {
        return 0.0;
    }
    let z = information_gain(predicted, full, measurement_variance);
    if z <= 0.0 {
        return 0.0;
    }
    (information_gain(predicted, m.min(full), measurement_variance) / z).clamp(0.0, 1.0)
}

/// Covered area of `selected` relative to that of `all`, or 0 when `all` covers nothing.
pub fn coverage_utility(grid: &CoverageGrid, selected: &[Vector3<f64>], all: &[Vector3<f64>], fov: f64) -> f64 {
    let full = grid.covered_fraction(all, fov);
    if full <= 0.0 {
        return 0.0;
    }
    grid.covered_fraction(selected, fov) / full
}

pub fn make_satellite_task_family(scenario: &SatScenario) -> SatStepFamily {
    scenario.family()
}

/// The sensing tasks (mean point utility over the points some satellite
/// can see) followed by the coverage task.
#[derive(Clone, Debug)]
pub struct SatStepFamily {
    sensing_tasks: usize,
    point_task: Vec<usize>,
    sat_points: Vec<Vec<u32>>,
    /// `tables[p][m]`: utility of point `p` seen by `m` selected satellites.
    tables: Vec<Vec<f64>>,
    task_scale: Vec<f64>,
    sat_cells: Vec<Vec<u32>>,
    cell_weights: Vec<f64>,
    full_area: f64,
}

#[derive(Clone, Debug)]
pub struct SatState {
    seen: Vec<u32>,
    cells: Vec<u16>,
    area: f64,
}

impl SatStepFamily {
    /// Satellites seeing each ground point.
    pub fn point_visibility(&self) -> Vec<usize> {
        self.tables.iter().map(|t| t.len() - 1).collect()
    }

    pub fn full_area(&self) -> f64 {
        self.full_area
    }

    fn sensing_values(&self, seen: &[u32], extra: Option<usize>, out: &mut [f64]) {
        out[..self.sensing_tasks].fill(0.0);
        let added: &[u32] = extra.map_or(&[], |e| &self.sat_points[e]);
        for (p, &task) in self.point_task.iter().enumerate() {
            let m = seen[p] as usize + usize::from(added.contains(&(p as u32)));
            out[task] += self.tables[p][m];
        }
        for (o, s) in out.iter_mut().zip(&self.task_scale) {
            *o = (*o * s).clamp(0.0, 1.0);
        }
    }

    fn coverage_value(&self, area: f64) -> f64 {
        if self.full_area > 0.0 {
            (area / self.full_area).min(1.0)
        } else {
            0.0
        }
    }
}

impl TaskFamily for SatStepFamily {
    type State = SatState;

    fn ground_size(&self) -> usize {
        self.sat_points.len()
    }
    fn num_tasks(&self) -> usize {
        self.sensing_tasks + 1
    }
    fn empty_state(&self) -> SatState {
        SatState { seen: vec![0; self.tables.len()], cells: vec![0; self.cell_weights.len()], area: 0.0 }
    }
    fn insert(&self, state: &mut SatState, e: usize) {
        for &p in &self.sat_points[e] {
            state.seen[p as usize] += 1;
        }
        for &c in &self.sat_cells[e] {
            let c = c as usize;
            if state.cells[c] == 0 {
                state.area += self.cell_weights[c];
            }
            state.cells[c] += 1;
        }
    }
    fn task_values(&self, state: &SatState, out: &mut [f64]) {
        self.sensing_values(&state.seen, None, out);
        out[self.sensing_tasks] = self.coverage_value(state.area);
    }
    fn task_values_with(&self, state: &SatState, e: usize, out: &mut [f64]) {
        self.sensing_values(&state.seen, Some(e), out);
        let mut area = state.area;
        for &c in &self.sat_cells[e] {
            if state.cells[c as usize] == 0 {
                area += self.cell_weights[c as usize];
            }
        }
        out[self.sensing_tasks] = self.coverage_value(area);
    }
}
