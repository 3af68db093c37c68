//! Growth-optimal feedback control from the value-function gradient.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{locate_both, FlowField, ScalarField};
use crate::hj::ValueFunction;
use crate::sim::step_vessel;
use crate::{Real, Vec2};

/// Gradient norm (value per length unit of the stored solution) at or below
/// which the vessel idles.
pub const GRAD_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Control<T> {
    pub ux: T,
    pub uy: T,
}

impl<T: Real> Control<T> {
    pub fn zero() -> Self {
        Self {
            ux: T::zero(),
            uy: T::zero(),
        }
    }

    pub fn as_vec(self) -> Vec2<T> {
        Vec2::new(self.ux, self.uy)
    }

    pub fn magnitude(self) -> T {
        self.ux.hypot(self.uy)
    }

    /// `u_max` along `dir`, or idle when `‖dir‖ ≤ GRAD_EPS`.
    pub fn along(dir: Vec2<T>, u_max: T) -> Self {
        let n = dir.norm();
        if !(n > T::lit(GRAD_EPS)) {
            return Self::zero();
        }
        Self {
            ux: u_max * (dir.x / n),
            uy: u_max * (dir.y / n),
        }
    }
}

/// Central differences at node `(i, j)` of slice `k`, one-sided on the edges.
fn node_gradient<T: Real>(f: &ScalarField<T>, k: usize, i: usize, j: usize) -> Vec2<T> {
    let g = &f.grid;
    let (il, ih) = (i.saturating_sub(1), (i + 1).min(g.nx - 1));
    let (jl, jh) = (j.saturating_sub(1), (j + 1).min(g.ny - 1));
    let gx = (f.at(k, ih, j) - f.at(k, il, j)) / (g.dx * T::from_usize(ih - il).unwrap());
    let gy = (f.at(k, i, jh) - f.at(k, i, jl)) / (g.dy * T::from_usize(jh - jl).unwrap());
    Vec2::new(gx, gy)
}

#[inline]
fn lerp2<T: Real>(a: Vec2<T>, b: Vec2<T>, w: T) -> Vec2<T> {
    if w == T::zero() {
        a
    } else {
        a + (b - a) * w
    }
}

/// Node gradients of `f` interpolated bilinearly in space and linearly in time.
pub fn field_gradient<T: Real>(f: &ScalarField<T>, p: Vec2<T>, t: T) -> Result<Vec2<T>> {
    let (c, tl) = locate_both(&f.grid, &f.time, p, t)?;
    let at_slice = |k: usize| {
        let bottom = lerp2(node_gradient(f, k, c.i, c.j), node_gradient(f, k, c.i + 1, c.j), c.wx);
        let top = lerp2(node_gradient(f, k, c.i, c.j + 1), node_gradient(f, k, c.i + 1, c.j + 1), c.wx);
        lerp2(bottom, top, c.wy)
    };
    let a = at_slice(tl.k);
    Ok(if tl.w == T::zero() {
        a
    } else {
        lerp2(a, at_slice(tl.k + 1), tl.w)
    })
}

/// `∇ₓJ(x, t)`: node gradients by central differences, interpolated
/// bilinearly in space and linearly in time.
pub fn gradient_at<T: Real>(vf: &ValueFunction<T>, p: Vec2<T>, t: T) -> Result<Vec2<T>> {
    Ok(field_gradient(vf.raw_slices(), p, t)? * vf.scale())
}

/// Hamiltonian maximizer `u* = u_max·∇J/‖∇J‖`; idle at stationary points.
///
/// Depends only on the direction of the stored gradient, so any positive
/// rescaling or shift of the value function yields the identical control.
pub fn feedback_control<T: Real>(vf: &ValueFunction<T>, p: Vec2<T>, t: T, u_max: T) -> Result<Control<T>> {
    if !(u_max >= T::zero()) {
        return Err(invalid(format!("u_max must be >= 0, got {u_max}")));
    }
    let g = field_gradient(vf.raw_slices(), p, t)?;
    let s = vf.scale();
    if s == T::zero() {
        return Ok(Control::zero());
    }
    Ok(Control::along(if s < T::zero() { -g } else { g }, u_max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub positions: Vec<Vec2<T>>,
    /// Control held over `[times[k], times[k+1]]`.
    pub controls: Vec<Control<T>>,
    /// Set when the rollout left the flow or value-function domain early.
    pub exited: bool,
}

/// Rolls the feedback policy out under `truth` from `(x0, t0)` to `t_end`,
/// re-querying the control every `step` seconds.
pub fn open_loop_trajectory<T: Real>(
    vf: &ValueFunction<T>,
    x0: Vec2<T>,
    t0: T,
    t_end: T,
    truth: &FlowField<T>,
    step: T,
) -> Result<Trajectory<T>> {
    if !(step > T::zero()) || !(t_end > t0) {
        return Err(invalid("rollout needs step > 0 and t_end > t0"));
    }
    let u_max = vf.config.u_max;
    let mut traj = Trajectory {
        times: vec![t0],
        positions: vec![x0],
        controls: Vec::new(),
        exited: false,
    };
    let (mut x, mut t) = (x0, t0);
    let tol = T::snap_tol() * (t_end.abs() + step);
    while t < t_end - tol {
        let dt = step.min(t_end - t);
        let u = match feedback_control(vf, x, t, u_max) {
            Ok(u) => u,
            Err(Error::OutOfDomain { .. }) => {
                traj.exited = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let Some(next) = step_vessel(x, u, t, dt, truth)? else {
            traj.exited = true;
            break;
        };
        t = if t_end - (t + dt) <= tol { t_end } else { t + dt };
        x = next;
        traj.controls.push(u);
        traj.times.push(t);
        traj.positions.push(x);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{SpatialGrid, TimeAxis};
    use crate::hj::SolveConfig;

    fn vf_from(f: impl Fn(Vec2<f64>) -> f64 + Sync, u_max: f64) -> ValueFunction<f64> {
        let g = SpatialGrid::new(-5.0, -5.0, 1.0, 1.0, 11, 11).unwrap();
        let t = TimeAxis::new(0.0, 100.0, 2).unwrap();
        let field = ScalarField::from_fn(g, t, |p, _| f(p)).unwrap();
        ValueFunction::from_field(field, SolveConfig::new(u_max))
    }

    #[test]
    fn linear_value_has_exact_gradient() {
        let vf = vf_from(|p| 0.3 * p.x, 0.1);
        for &(x, y) in &[(0.0, 0.0), (1.3, -2.7), (4.0, 4.9)] {
            let g = gradient_at(&vf, Vec2::new(x, y), 50.0).unwrap();
            assert!((g.x - 0.3).abs() < 1e-14 && g.y.abs() < 1e-14, "{g:?}");
        }
    }

    #[test]
    fn constant_value_has_zero_gradient_and_idles() {
        let vf = vf_from(|_| 2.5, 0.1);
        let p = Vec2::new(0.4, 0.4);
        assert_eq!(gradient_at(&vf, p, 10.0).unwrap(), Vec2::zero());
        assert_eq!(feedback_control(&vf, p, 10.0, 0.1).unwrap(), Control::zero());
    }

    #[test]
    fn radially_symmetric_value_is_flat_at_center() {
        let vf = vf_from(|p| (-(p.x * p.x + p.y * p.y) / 8.0).exp(), 0.1);
        let g = gradient_at(&vf, Vec2::zero(), 30.0).unwrap();
        assert!(g.norm() < 1e-9);
    }

    #[test]
    fn control_normalizes_gradient() {
        let vf = vf_from(|p| 3.0 * p.x + 4.0 * p.y, 0.1);
        let u = feedback_control(&vf, Vec2::new(0.5, 0.5), 0.0, 0.1).unwrap();
        assert!((u.ux - 0.06).abs() < 1e-15 && (u.uy - 0.08).abs() < 1e-15);
    }

    #[test]
    fn scaling_and_shift_leave_control_identical() {
        let vf = vf_from(|p| (p.x * 0.7).sin() + 0.2 * p.y * p.y, 0.1);
        let p = Vec2::new(1.37, -2.21);
        let base = feedback_control(&vf, p, 40.0, 0.1).unwrap();
        for &(c, k) in &[(3.7, 0.0), (1e-6, -12.0), (250.0, 1e5)] {
            assert_eq!(feedback_control(&vf.affine(c, k), p, 40.0, 0.1).unwrap(), base);
        }
        let g = gradient_at(&vf.affine(2.0, 1.0), p, 40.0).unwrap();
        assert_eq!(g, gradient_at(&vf, p, 40.0).unwrap() * 2.0);
    }

    #[test]
    fn queries_outside_fail() {
        let vf = vf_from(|p| p.x, 0.1);
        assert!(matches!(
            feedback_control(&vf, Vec2::new(6.0, 0.0), 0.0, 0.1),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(gradient_at(&vf, Vec2::new(0.0, 0.0), 101.0).is_err());
    }

    fn still_water() -> FlowField<f64> {
        let g = SpatialGrid::new(-5.0, -5.0, 1.0, 1.0, 11, 11).unwrap();
        FlowField::constant(g, TimeAxis::new(0.0, 100.0, 2).unwrap(), Vec2::zero()).unwrap()
    }

    #[test]
    fn flat_value_keeps_vessel_in_place() {
        let vf = vf_from(|_| 1.0, 0.01);
        let tr = open_loop_trajectory(&vf, Vec2::new(0.2, 0.3), 0.0, 100.0, &still_water(), 10.0).unwrap();
        assert!(!tr.exited);
        assert_eq!(tr.positions.last().unwrap(), &Vec2::new(0.2, 0.3));
    }

    #[test]
    fn value_plane_drives_straight_line() {
        let vf = vf_from(|p| p.x, 0.01);
        let tr = open_loop_trajectory(&vf, Vec2::new(-2.0, 1.0), 0.0, 100.0, &still_water(), 10.0).unwrap();
        assert_eq!(tr.times.len(), 11);
        let end = *tr.positions.last().unwrap();
        assert!((end.x - (-1.0)).abs() < 1e-12 && (end.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rollout_flags_domain_exit() {
        let vf = vf_from(|p| p.x, 0.1);
        let tr = open_loop_trajectory(&vf, Vec2::new(4.5, 0.0), 0.0, 100.0, &still_water(), 10.0).unwrap();
        assert!(tr.exited);
        assert!(vf.grid().contains(*tr.positions.last().unwrap()));
    }
}
