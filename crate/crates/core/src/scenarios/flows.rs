use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{FlowField, SpatialGrid, TimeAxis};
use crate::{Real, Vec2};

/// Double-gyre velocity at nondimensional `(x, y)` in `[0, 2] × [0, 1]`.
fn gyre(x: f64, y: f64, t: f64, a: f64, eps: f64, omega: f64) -> (f64, f64) {
    let s = eps * (omega * t).sin();
    let f = s * x * x + (1.0 - 2.0 * s) * x;
    let df = 2.0 * s * x + 1.0 - 2.0 * s;
    (-PI * a * (PI * f).sin() * (PI * y).cos(), PI * a * df * (PI * f).cos() * (PI * y).sin())
}

/// Unsteady double gyre. The domain height is mapped to the unit length, so a
/// grid with aspect 2:1 covers both gyres; `a` is a speed (u/s).
pub fn double_gyre<T: Real>(a: T, eps: T, omega: T, grid: SpatialGrid<T>, time: TimeAxis<T>) -> Result<FlowField<T>> {
    let (a, eps, omega) = (a.as_f64(), eps.as_f64(), omega.as_f64());
    let (x0, y0) = (grid.x0.as_f64(), grid.y0.as_f64());
    let l = (grid.y_max() - grid.y0).as_f64();
    FlowField::from_fn(grid, time, |p, t| {
        let (u, v) = gyre((p.x.as_f64() - x0) / l, (p.y.as_f64() - y0) / l, t.as_f64(), a, eps, omega);
        Vec2::new(T::lit(u), T::lit(v))
    })
}

pub fn uniform<T: Real>(velocity: Vec2<T>, grid: SpatialGrid<T>, time: TimeAxis<T>) -> Result<FlowField<T>> {
    FlowField::constant(grid, time, velocity)
}

/// Zonal jet `u = speed·exp(-(y - center_y)²/2w²)`, `v = 0`.
pub fn highway<T: Real>(center_y: T, width: T, speed: T, grid: SpatialGrid<T>, time: TimeAxis<T>) -> Result<FlowField<T>> {
    if !(width > T::zero()) {
        return Err(invalid("highway width must be > 0"));
    }
    FlowField::from_fn(grid, time, |p, _| {
        let d = (p.y - center_y) / width;
        Vec2::new(speed * (-d * d / T::lit(2.0)).exp(), T::zero())
    })
}

/// Analytic flow kinds as they appear in scenario configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowSpec {
    DoubleGyre {
        a: f64,
        eps: f64,
        /// Oscillation period (s).
        period: f64,
    },
    Uniform {
        u: f64,
        v: f64,
    },
    Highway {
        center_y: f64,
        width: f64,
        speed: f64,
    },
    Composite {
        parts: Vec<FlowSpec>,
    },
}

impl FlowSpec {
    pub fn build<T: Real>(&self, grid: SpatialGrid<T>, time: TimeAxis<T>) -> Result<FlowField<T>> {
        match self {
            FlowSpec::DoubleGyre { a, eps, period } => {
                if !(*period > 0.0) {
                    return Err(invalid("double gyre period must be > 0"));
                }
                double_gyre(T::lit(*a), T::lit(*eps), T::lit(2.0 * PI / period), grid, time)
            }
            FlowSpec::Uniform { u, v } => uniform(Vec2::new(T::lit(*u), T::lit(*v)), grid, time),
            FlowSpec::Highway { center_y, width, speed } => highway(T::lit(*center_y), T::lit(*width), T::lit(*speed), grid, time),
            FlowSpec::Composite { parts } => {
                let mut acc = FlowField::constant(grid, time, Vec2::zero())?;
                for p in parts {
                    acc = acc.add(&p.build(grid, time)?)?;
                }
                Ok(acc)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(n: usize) -> SpatialGrid<f64> {
        SpatialGrid::spanning(0.0, 0.0, 2.0, 1.0, 2 * n - 1, n).unwrap()
    }

    fn instant() -> TimeAxis<f64> {
        TimeAxis::new(0.0, 1.0, 1).unwrap()
    }

    #[test]
    fn steady_gyre_examples() {
        let f = double_gyre(0.1, 0.0, 0.0, unit_box(11), instant()).unwrap();
        let c = f.sample(Vec2::new(0.5, 0.5), 0.0).unwrap();
        assert!(c.norm() < 1e-15);
        let s = f.sample(Vec2::new(1.0, 0.5), 0.0).unwrap();
        assert!(s.x.abs() < 1e-15 && (s.y + PI * 0.1).abs() < 1e-12);
    }

    #[test]
    fn gyre_is_divergence_free() {
        // Second-order central differences; the truncation error scales with h².
        let mut worst = Vec::new();
        for n in [21, 41] {
            let g = unit_box(n);
            let time = TimeAxis::new(0.0, 1.0, 2).unwrap();
            let f = double_gyre(0.1, 0.25, 2.0 * PI / 10.0, g, time).unwrap();
            let (u, v) = f.components();
            let mut m: f64 = 0.0;
            for j in 1..g.ny - 1 {
                for i in 1..g.nx - 1 {
                    let div = (u.at(1, i + 1, j) - u.at(1, i - 1, j)) / (2.0 * g.dx) + (v.at(1, i, j + 1) - v.at(1, i, j - 1)) / (2.0 * g.dy);
                    m = m.max(div.abs());
                }
            }
            worst.push(m);
        }
        assert!(worst[0] < 5e-3, "{worst:?}");
        assert!(worst[1] < worst[0] / 3.0, "{worst:?}");
    }

    #[test]
    fn highway_profile() {
        let g = SpatialGrid::spanning(0.0, -10.0, 10.0, 10.0, 3, 21).unwrap();
        let f = highway(0.0, 2.0, 1.5, g, instant()).unwrap();
        assert_eq!(f.sample(Vec2::new(5.0, 0.0), 0.0).unwrap(), Vec2::new(1.5, 0.0));
        assert!(f.sample(Vec2::new(5.0, 10.0), 0.0).unwrap().x < 1e-5);
    }

    #[test]
    fn composite_adds_parts() {
        let spec = FlowSpec::Composite {
            parts: vec![FlowSpec::Uniform { u: 0.1, v: 0.0 }, FlowSpec::Uniform { u: 0.0, v: -0.2 }],
        };
        let f = spec.build(unit_box(3), instant()).unwrap();
        assert_eq!(f.sample(Vec2::new(1.0, 0.5), 0.0).unwrap(), Vec2::new(0.1, -0.2));
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<FlowSpec>(&json).unwrap(), spec);
    }
}
