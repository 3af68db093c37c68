use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{ScalarField, SpatialGrid, TimeAxis};
use crate::growth::{GrowthModel, LightCycle};
use crate::{Real, Vec2};

/// Gaussian growth hotspot; the center may drift at constant velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Blob {
    pub center: Vec2<f64>,
    pub radius: f64,
    /// Peak gross rate (1/s).
    pub peak: f64,
    #[serde(default)]
    pub drift: Vec2<f64>,
}

impl Blob {
    pub fn new(center: Vec2<f64>, radius: f64, peak: f64) -> Self {
        Self {
            center,
            radius,
            peak,
            drift: Vec2::zero(),
        }
    }

    pub fn value(&self, p: Vec2<f64>, dt: f64) -> f64 {
        let d = p - (self.center + self.drift * dt);
        self.peak * (-d.dot(d) / (2.0 * self.radius * self.radius)).exp()
    }
}

/// `background + Σ blobs` on the given grid; blob drift is measured from `time.t0`.
pub fn gross_field<T: Real>(blobs: &[Blob], background: f64, grid: SpatialGrid<T>, time: TimeAxis<T>) -> Result<ScalarField<T>> {
    if let Some(b) = blobs.iter().find(|b| !(b.radius > 0.0)) {
        return Err(invalid(format!("blob radius must be > 0, got {}", b.radius)));
    }
    let t0 = time.t0.as_f64();
    ScalarField::from_fn(grid, time, |p, t| {
        let p = Vec2::new(p.x.as_f64(), p.y.as_f64());
        let dt = t.as_f64() - t0;
        T::lit(background + blobs.iter().map(|b| b.value(p, dt)).sum::<f64>())
    })
}

/// Sum of Gaussian bumps minus a constant respiration rate, always lit.
pub fn growth_blobs<T: Real>(blobs: &[Blob], resp: T, grid: SpatialGrid<T>, time: TimeAxis<T>) -> Result<GrowthModel<T>> {
    GrowthModel::new(gross_field(blobs, 0.0, grid, time)?, resp, None::<LightCycle<T>>)
}
