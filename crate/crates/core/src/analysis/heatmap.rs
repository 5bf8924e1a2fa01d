//! Latitude/longitude histogram of pointing directions.
//!
//! Latitude is the pitch `asin(y)`, longitude the yaw `atan2(x, z)`, both in
//! the stage frame. A bin spanning `[lat0, lat1] × [lon0, lon1]` covers
//! `(lon1 − lon0)·(sin lat1 − sin lat0)` steradians. Densities are counts per
//! steradian divided by the sample count, so `Σ density·Ω = 1` and a uniform
//! distribution has density `1/4π` everywhere.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridResolution {
    pub n_lat: usize,
    pub n_lon: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        GridResolution { n_lat: 18, n_lon: 36 }
    }
}

impl GridResolution {
    pub fn new(n_lat: usize, n_lon: usize) -> Result<Self, AnalysisError> {
        if n_lat == 0 || n_lon == 0 || n_lat > 1800 || n_lon > 3600 {
            return Err(AnalysisError::InvalidResolution { n_lat, n_lon });
        }
        Ok(GridResolution { n_lat, n_lon })
    }

    pub fn bins(&self) -> usize {
        self.n_lat * self.n_lon
    }

    pub fn lat_edges(&self) -> Vec<f64> {
        (0..=self.n_lat).map(|i| -FRAC_PI_2 + PI * i as f64 / self.n_lat as f64).collect()
    }

    pub fn lon_edges(&self) -> Vec<f64> {
        (0..=self.n_lon).map(|j| -PI + TAU * j as f64 / self.n_lon as f64).collect()
    }

    /// Row-major bin index (`lat * n_lon + lon`) of a unit direction.
    pub fn bin_of(&self, d: &Vector3<f64>) -> usize {
        let lat = d.y.clamp(-1.0, 1.0).asin();
        let lon = d.x.atan2(d.z);
        let i = (((lat + FRAC_PI_2) / PI) * self.n_lat as f64).floor() as usize;
        let j = (((lon + PI) / TAU) * self.n_lon as f64).floor() as usize;
        i.min(self.n_lat - 1) * self.n_lon + j.min(self.n_lon - 1)
    }

    /// Solid angle of each bin, row-major.
    pub fn solid_angles(&self) -> Vec<f64> {
        let lat = self.lat_edges();
        let dlon = TAU / self.n_lon as f64;
        (0..self.n_lat)
            .flat_map(|i| {
                let band = dlon * (lat[i + 1].sin() - lat[i].sin());
                std::iter::repeat_n(band, self.n_lon)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereHistogram {
    pub resolution: GridResolution,
    pub samples: u64,
    /// Row-major counts, latitude band major.
    pub counts: Vec<u64>,
    /// Steradians per bin.
    pub solid_angle: Vec<f64>,
    /// `count / (samples · solid_angle)`.
    pub density: Vec<f64>,
}

impl SphereHistogram {
    pub fn count(&self, lat: usize, lon: usize) -> u64 {
        self.counts[lat * self.resolution.n_lon + lon]
    }

    /// `Σ density·Ω`; 1 up to rounding.
    pub fn total_probability(&self) -> f64 {
        self.density.iter().zip(&self.solid_angle).map(|(d, w)| d * w).sum()
    }
}

pub fn sphere_heatmap(path: &[Vector3<f64>], resolution: GridResolution) -> Result<SphereHistogram, AnalysisError> {
    if path.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let resolution = GridResolution::new(resolution.n_lat, resolution.n_lon)?;
    let mut counts = vec![0u64; resolution.bins()];
    for d in path {
        if !(d.x.is_finite() && d.y.is_finite() && d.z.is_finite()) {
            return Err(AnalysisError::InvalidParameter("non-finite direction".into()));
        }
        counts[resolution.bin_of(d)] += 1;
    }
    let n = path.len() as f64;
    let solid_angle = resolution.solid_angles();
    let density = counts.iter().zip(&solid_angle).map(|(&c, &w)| c as f64 / (n * w)).collect();
    Ok(SphereHistogram { resolution, samples: path.len() as u64, counts, solid_angle, density })
}
