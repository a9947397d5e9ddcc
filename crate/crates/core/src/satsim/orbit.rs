//! Walker-Delta constellations on circular orbits over a rotating spherical Earth.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;

use crate::error::{domain, Result};

/// Gravitational parameter of the Earth, km³/s².
pub const EARTH_MU: f64 = 398_600.4418;
/// Spherical Earth radius, km.
pub const EARTH_RADIUS: f64 = 6371.0;
/// Sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_0e-5;

/// Angular slack on the closed visibility cone, so points placed exactly on
/// the boundary are not lost to rounding.
const CONE_SLACK: f64 = 1e-12;

/// Pattern `inclination: total/planes/phasing` plus the shared orbit and sensor geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkerDelta {
    pub inclination: f64,
    pub total: usize,
    pub planes: usize,
    pub phasing: usize,
    pub semi_major_axis: f64,
    pub fov_half_angle: f64,
    pub epoch: f64,
}

impl WalkerDelta {
    /// `i:T/P/F` with the default altitude (8378.1 km) and a π/6 half-angle cone.
    pub fn pattern(inclination_deg: f64, total: usize, planes: usize, phasing: usize) -> Self {
        WalkerDelta {
            inclination: inclination_deg.to_radians(),
            total,
            planes,
            phasing,
            semi_major_axis: 8378.1,
            fov_half_angle: PI / 6.0,
            epoch: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.planes == 0 || self.total == 0 {
            return Err(domain("a constellation needs at least one plane and one satellite"));
        }
        if self.total % self.planes != 0 {
            return Err(domain(format!("{} satellites do not split evenly over {} planes", self.total, self.planes)));
        }
        if self.phasing >= self.planes {
            return Err(domain(format!("phasing {} must be below the plane count {}", self.phasing, self.planes)));
        }
        if !(self.semi_major_axis > EARTH_RADIUS) {
            return Err(domain("semi-major axis must exceed the Earth radius"));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle < PI / 2.0) {
            return Err(domain("field-of-view half-angle must lie in (0, π/2)"));
        }
        if !(self.inclination.is_finite() && self.epoch.is_finite()) {
            return Err(domain("inclination and epoch must be finite"));
        }
        Ok(())
    }

    pub fn per_plane(&self) -> usize {
        self.total / self.planes
    }

    /// Orbital period `2π √(a³/μ)` in seconds.
    pub fn period(&self) -> f64 {
        TAU * (self.semi_major_axis.powi(3) / EARTH_MU).sqrt()
    }

    pub fn mean_motion(&self) -> f64 {
        (EARTH_MU / self.semi_major_axis.powi(3)).sqrt()
    }
}

/// Orbital elements of one satellite at the constellation epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Satellite {
    pub plane: usize,
    pub raan: f64,
    /// Argument of latitude at epoch (true anomaly for a circular orbit).
    pub anomaly: f64,
}

#[derive(Clone, Debug)]
pub struct Constellation {
    params: WalkerDelta,
    satellites: Vec<Satellite>,
}

pub fn build_constellation(params: WalkerDelta) -> Result<Constellation> {
    params.validate()?;
    let per_plane = params.per_plane();
    let mut satellites = Vec::with_capacity(params.total);
    for plane in 0..params.planes {
        let raan = TAU * plane as f64 / params.planes as f64;
        let offset = TAU * (params.phasing * plane) as f64 / params.total as f64;
        for slot in 0..per_plane {
            let anomaly = (TAU * slot as f64 / per_plane as f64 + offset).rem_euclid(TAU);
            satellites.push(Satellite { plane, raan, anomaly });
        }
    }
    Ok(Constellation { params, satellites })
}

impl Constellation {
    pub fn params(&self) -> &WalkerDelta {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }

    pub fn satellites(&self) -> &[Satellite] {
        &self.satellites
    }

    /// Inertial position at time `t` (seconds).
    pub fn inertial_position(&self, sat: usize, t: f64) -> Vector3<f64> {
        let s = &self.satellites[sat];
        let p = &self.params;
        let u = s.anomaly + p.mean_motion() * (t - p.epoch);
        let (su, cu) = u.sin_cos();
        let (so, co) = s.raan.sin_cos();
        let (si, ci) = p.inclination.sin_cos();
        p.semi_major_axis * Vector3::new(co * cu - so * su * ci, so * cu + co * su * ci, su * si)
    }

    /// Earth-fixed position at time `t`; the two frames coincide at `t = 0`.
    pub fn position(&self, sat: usize, t: f64) -> Vector3<f64> {
        let r = self.inertial_position(sat, t);
        let (s, c) = (EARTH_ROTATION_RATE * t).sin_cos();
        Vector3::new(c * r.x + s * r.y, -s * r.x + c * r.y, r.z)
    }

    pub fn positions(&self, t: f64) -> Vec<Vector3<f64>> {
        (0..self.len()).map(|i| self.position(i, t)).collect()
    }
}

pub fn satellite_position(constellation: &Constellation, sat: usize, t: f64) -> Vector3<f64> {
    constellation.position(sat, t)
}

/// A point on the Earth surface in Earth-fixed coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroundPoint {
    pub latitude: f64,
    pub longitude: f64,
    pub task: usize,
}

impl GroundPoint {
    pub fn new(latitude: f64, longitude: f64, task: usize) -> Result<Self> {
        if !(-PI / 2.0..=PI / 2.0).contains(&latitude) || !longitude.is_finite() {
            return Err(domain(format!("invalid ground coordinates ({latitude}, {longitude})")));
        }
        Ok(GroundPoint { latitude, longitude, task })
    }

    pub fn unit(&self) -> Vector3<f64> {
        unit_vector(self.latitude, self.longitude)
    }

    pub fn position(&self) -> Vector3<f64> {
        EARTH_RADIUS * self.unit()
    }
}

pub fn unit_vector(latitude: f64, longitude: f64) -> Vector3<f64> {
    let (sl, cl) = latitude.sin_cos();
    let (so, co) = longitude.sin_cos();
    Vector3::new(cl * co, cl * so, sl)
}

/// Nadir-pointing closed cone of half-angle `fov_half_angle`, restricted to
/// the hemisphere the satellite can see. `point` is an Earth-fixed position
/// on the sphere.
pub fn is_visible(sat: &Vector3<f64>, point: &Vector3<f64>, fov_half_angle: f64) -> bool {
    let to_point = point - sat;
    let dist = to_point.norm();
    if dist == 0.0 {
        return true;
    }
    // Line of sight stays outside the sphere iff the point faces the satellite.
    if point.dot(&to_point) > 0.0 {
        return false;
    }
    let cos_angle = -sat.dot(&to_point) / (sat.norm() * dist);
    cos_angle >= (fov_half_angle + CONE_SLACK).cos()
}

/// Earth central angle between the sub-satellite point and the rim of the
/// sensor footprint, or `None` when the cone is wider than the horizon.
pub fn footprint_angle(semi_major_axis: f64, fov_half_angle: f64) -> Option<f64> {
    let s = semi_major_axis * fov_half_angle.sin() / EARTH_RADIUS;
    (s <= 1.0).then(|| s.asin() - fov_half_angle)
}
