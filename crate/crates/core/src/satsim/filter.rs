//! Lorenz-63 dynamics and an unscented Kalman filter with direct state measurements.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Jitter added once when a covariance fails its Cholesky factorization.
pub const COVARIANCE_JITTER: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lorenz63 {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for Lorenz63 {
    fn default() -> Self {
        Lorenz63 { sigma: 10.0, rho: 28.0, beta: 8.0 / 3.0 }
    }
}

impl Lorenz63 {
    pub fn derivative(&self, s: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(self.sigma * (s.y - s.x), s.x * (self.rho - s.z) - s.y, s.x * s.y - self.beta * s.z)
    }

    pub fn step(&self, s: &Vector3<f64>, dt: f64) -> Vector3<f64> {
        lorenz63_rk4(s, dt, self.sigma, self.rho, self.beta)
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn lorenz63_rk4(s: &Vector3<f64>, dt: f64, sigma: f64, rho: f64, beta: f64) -> Vector3<f64> {
    let m = Lorenz63 { sigma, rho, beta };
    let k1 = m.derivative(s);
    let k2 = m.derivative(&(s + 0.5 * dt * k1));
    let k3 = m.derivative(&(s + 0.5 * dt * k2));
    let k4 = m.derivative(&(s + dt * k3));
    s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterState {
    pub mean: Vector3<f64>,
    pub covariance: Matrix3<f64>,
}

/// Sigma-point spread `alpha`, prior-knowledge `beta` and secondary `kappa`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ukf {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for Ukf {
    fn default() -> Self {
        Ukf { alpha: 1e-3, beta: 2.0, kappa: 0.0 }
    }
}

impl Ukf {
    fn lambda(&self) -> f64 {
        self.alpha * self.alpha * (3.0 + self.kappa) - 3.0
    }

    /// Mean and covariance weights of the seven sigma points.
    fn weights(&self) -> ([f64; 7], [f64; 7]) {
        let lam = self.lambda();
        let w = 1.0 / (2.0 * (3.0 + lam));
        let mut wm = [w; 7];
        let mut wc = [w; 7];
        wm[0] = lam / (3.0 + lam);
        wc[0] = wm[0] + 1.0 - self.alpha * self.alpha + self.beta;
        (wm, wc)
    }

    fn sigma_points(&self, state: &FilterState) -> Result<[Vector3<f64>; 7]> {
        let l = cholesky((3.0 + self.lambda()) * state.covariance)?;
        let mut pts = [state.mean; 7];
        for j in 0..3 {
            let c = l.column(j).into_owned();
            pts[1 + j] += c;
            pts[4 + j] -= c;
        }
        Ok(pts)
    }

    /// Unscented time update through `dynamics` with additive process noise.
    pub fn predict<D>(&self, state: &FilterState, dynamics: D, process_noise: &Matrix3<f64>) -> Result<FilterState>
    where
        D: Fn(&Vector3<f64>) -> Vector3<f64>,
    {
        let (wm, wc) = self.weights();
        let pts = self.sigma_points(state)?.map(|p| dynamics(&p));
        let mean = pts.iter().zip(&wm).fold(Vector3::zeros(), |acc, (p, w)| acc + *w * p);
        let mut cov = *process_noise;
        for (p, w) in pts.iter().zip(&wc) {
            let d = p - mean;
            cov += *w * d * d.transpose();
        }
        Ok(FilterState { mean, covariance: spd_repair(cov)? })
    }

    /// Measurement update for `z = x + v`, `v ~ N(0, noise)`, through
    /// sigma points redrawn from the prediction.
    pub fn update(&self, state: &FilterState, z: &Vector3<f64>, noise: &Matrix3<f64>) -> Result<FilterState> {
        let (wm, wc) = self.weights();
        let pts = self.sigma_points(state)?;
        let z_hat = pts.iter().zip(&wm).fold(Vector3::zeros(), |acc, (p, w)| acc + *w * p);
        let mut pzz = *noise;
        let mut pxz = Matrix3::zeros();
        for (p, w) in pts.iter().zip(&wc) {
            let dz = p - z_hat;
            pzz += *w * dz * dz.transpose();
            pxz += *w * (p - state.mean) * dz.transpose();
        }
        let pzz = symmetrize(&pzz);
        let gain = pzz
            .cholesky()
            .ok_or_else(|| Error::Numerical("innovation covariance is not positive definite".into()))?
            .solve(&pxz.transpose())
            .transpose();
        let mean = state.mean + gain * (z - z_hat);
        let cov = state.covariance - gain * pzz * gain.transpose();
        Ok(FilterState { mean, covariance: spd_repair(cov)? })
    }
}

/// Predict with Lorenz dynamics, then update when at least one measurement
/// is available. `measurements` are independent draws, each with covariance
/// `measurement_noise`.
pub fn ukf_step(
    ukf: &Ukf,
    state: &FilterState,
    model: &Lorenz63,
    dt: f64,
    measurements: &[Vector3<f64>],
    process_noise: &Matrix3<f64>,
    measurement_noise: &Matrix3<f64>,
) -> Result<FilterState> {
    let predicted = ukf.predict(state, |x| model.step(x, dt), process_noise)?;
    fuse_measurements(ukf, &predicted, measurements, measurement_noise)
}

/// `m` independent direct measurements are equivalent to their mean with
/// covariance `R/m`.
pub fn fuse_measurements(
    ukf: &Ukf,
    predicted: &FilterState,
    measurements: &[Vector3<f64>],
    measurement_noise: &Matrix3<f64>,
) -> Result<FilterState> {
    if measurements.is_empty() {
        return Ok(predicted.clone());
    }
    let m = measurements.len() as f64;
    let z = measurements.iter().sum::<Vector3<f64>>() / m;
    ukf.update(predicted, &z, &(measurement_noise / m))
}

pub fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

pub fn is_spd(m: &Matrix3<f64>) -> bool {
    (m - m.transpose()).amax() <= 1e-9 * m.amax().max(1.0) && m.cholesky().is_some()
}

fn cholesky(m: Matrix3<f64>) -> Result<Matrix3<f64>> {
    spd_repair(m)?
        .cholesky()
        .map(|c| c.unpack())
        .ok_or_else(|| Error::Numerical("covariance is not positive definite".into()))
}

/// Symmetrizes, then adds jitter once if the matrix is not positive definite.
fn spd_repair(m: Matrix3<f64>) -> Result<Matrix3<f64>> {
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::Numerical("covariance has non-finite entries".into()));
    }
    let m = symmetrize(&m);
    if m.cholesky().is_some() {
        return Ok(m);
    }
    let jittered = m + Matrix3::identity() * COVARIANCE_JITTER;
    if jittered.cholesky().is_some() {
        Ok(jittered)
    } else {
        Err(Error::Numerical("covariance lost positive definiteness".into()))
    }
}
