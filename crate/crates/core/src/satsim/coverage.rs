//! Latitude-longitude grid of 2° cells, weighted by spherical area.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::orbit::{is_visible, unit_vector, EARTH_RADIUS};

#[derive(Clone, Debug)]
pub struct CoverageGrid {
    centers: Vec<Vector3<f64>>,
    /// Area of each cell as a fraction of the whole sphere.
    weights: Vec<f64>,
}

impl CoverageGrid {
    pub fn new(cell_deg: f64) -> Self {
        let rows = (180.0 / cell_deg).round() as usize;
        let cols = (360.0 / cell_deg).round() as usize;
        let (dlat, dlon) = (PI / rows as f64, 2.0 * PI / cols as f64);
        let mut centers = Vec::with_capacity(rows * cols);
        let mut weights = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let lo = -PI / 2.0 + r as f64 * dlat;
            let band = (lo + dlat).sin() - lo.sin();
            for c in 0..cols {
                centers.push(EARTH_RADIUS * unit_vector(lo + 0.5 * dlat, -PI + (c as f64 + 0.5) * dlon));
                weights.push(band / (2.0 * cols as f64));
            }
        }
        CoverageGrid { centers, weights }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn weight(&self, cell: usize) -> f64 {
        self.weights[cell]
    }

    /// Cells whose center the satellite sees.
    pub fn visible_cells(&self, sat: &Vector3<f64>, fov_half_angle: f64) -> Vec<u32> {
        // Cheap pre-filter: a visible center lies within the horizon cap.
        let u = sat.normalize();
        let horizon = EARTH_RADIUS * EARTH_RADIUS / sat.norm() - 1e-6;
        self.centers
            .iter()
            .enumerate()
            .filter(|(_, c)| c.dot(&u) >= horizon && is_visible(sat, c, fov_half_angle))
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Area fraction seen by at least one of `sats`.
    pub fn covered_fraction(&self, sats: &[Vector3<f64>], fov_half_angle: f64) -> f64 {
        let mut seen = vec![false; self.len()];
        for s in sats {
            for c in self.visible_cells(s, fov_half_angle) {
                seen[c as usize] = true;
            }
        }
        seen.iter().zip(&self.weights).filter(|(s, _)| **s).map(|(_, w)| w).sum()
    }
}

impl Default for CoverageGrid {
    fn default() -> Self {
        CoverageGrid::new(2.0)
    }
}
