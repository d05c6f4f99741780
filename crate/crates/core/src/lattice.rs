//! Deterministic near-equidistant sampling of the unit sphere.
//!
//! Points come from the spherical Fibonacci lattice in its offset form
//! `z_k = 1 - (2k + 1) / m`, which avoids placing points at the poles.
//! The same `m` always yields bitwise-identical points, so one lattice can
//! be built per process and shared.

use crate::error::{Error, Result};
use crate::vec3;

/// An ordered set of `m` unit vectors covering the sphere near-uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereLattice {
    points: Vec<[f64; 3]>,
}

impl SphereLattice {
    /// Builds the lattice: point `k` has `z = 1 - (2k + 1) / m` and azimuth
    /// `2 pi k (2 - phi)` with `phi` the golden ratio.
    pub fn fibonacci(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("lattice size must be at least 1"));
        }
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let azimuth_step = 2.0 * std::f64::consts::PI * (2.0 - golden);
        let points = (0..m)
            .map(|k| {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / m as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let phi = azimuth_step * k as f64;
                [rho * phi.cos(), rho * phi.sin(), z]
            })
            .collect();
        Ok(Self { points })
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for p in &self.points {
            c = vec3::add(c, *p);
        }
        vec3::scale(c, 1.0 / self.m() as f64)
    }

    /// Nearest-neighbor angle statistics over all points, in degrees.
    pub fn neighbor_angle_stats(&self) -> Result<NeighborAngleStats> {
        if self.m() < 2 {
            return Err(Error::invalid("neighbor statistics need at least 2 points"));
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for (i, p) in self.points.iter().enumerate() {
            let mut best_dot = f64::NEG_INFINITY;
            for (j, q) in self.points.iter().enumerate() {
                if i != j {
                    best_dot = best_dot.max(vec3::dot(*p, *q));
                }
            }
            let angle = best_dot.clamp(-1.0, 1.0).acos().to_degrees();
            min = min.min(angle);
            max = max.max(angle);
            sum += angle;
        }
        Ok(NeighborAngleStats {
            min_deg: min,
            mean_deg: sum / self.m() as f64,
            max_deg: max,
        })
    }
}

/// Per-point nearest-neighbor angles reduced to min / mean / max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborAngleStats {
    pub min_deg: f64,
    pub mean_deg: f64,
    pub max_deg: f64,
}

/// Mean nearest-neighbor angle for each requested lattice size, sorted by
/// size. Duplicate sizes are collapsed.
pub fn spacing_curve(m_values: &[usize]) -> Result<Vec<(usize, f64)>> {
    let mut sizes: Vec<usize> = m_values.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
        .into_iter()
        .map(|m| {
            let stats = SphereLattice::fibonacci(m)?.neighbor_angle_stats()?;
            Ok((m, stats.mean_deg))
        })
        .collect()
}
