use crate::error::{invalid, Result};
use crate::field::SpatialGrid;
use crate::{Real, Vec2};

/// `max_{‖u‖≤u_max} ∇J·(v + u) + r`, attained at `u = u_max·∇J/‖∇J‖`.
pub fn hamiltonian<T: Real>(grad: Vec2<T>, v: Vec2<T>, u_max: T, r: T) -> Result<T> {
    if !grad.is_finite() || !v.is_finite() || !u_max.is_finite() || !r.is_finite() {
        return Err(invalid("non-finite Hamiltonian input"));
    }
    Ok(hamiltonian_raw(grad.x, grad.y, v.x, v.y, u_max) + r)
}

#[inline(always)]
pub(crate) fn hamiltonian_raw<T: Real>(px: T, py: T, vx: T, vy: T, u_max: T) -> T {
    px * vx + py * vy + u_max * px.hypot(py)
}

/// Explicit step `cfl / (sx/dx + sy/dy)` for axis-wise propagation speed
/// bounds `sx`, `sy` (flow bound plus actuation).
///
/// `Ok(None)` means nothing propagates and any step is stable.
pub fn cfl_timestep<T: Real>(max_speed_x: T, max_speed_y: T, grid: &SpatialGrid<T>, cfl: T) -> Result<Option<T>> {
    if !(max_speed_x >= T::zero() && max_speed_y >= T::zero()) {
        return Err(invalid(format!(
            "propagation speeds must be non-negative, got ({max_speed_x}, {max_speed_y})"
        )));
    }
    if !(cfl > T::zero() && cfl <= T::one()) {
        return Err(invalid(format!("cfl must be in (0, 1], got {cfl}")));
    }
    let rate = max_speed_x / grid.dx + max_speed_y / grid.dy;
    if rate == T::zero() {
        return Ok(None);
    }
    Ok(Some(cfl / rate))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamiltonian_examples() {
        let h = hamiltonian(Vec2::new(1.0f64, 0.0), Vec2::new(0.5, 0.0), 0.1, 0.2).unwrap();
        assert!((h - 0.8).abs() < 1e-15);
        let h = hamiltonian(Vec2::new(0.0, 0.0), Vec2::new(3.0, -7.0), 0.4, 0.3).unwrap();
        assert_eq!(h, 0.3);
        let h = hamiltonian(Vec2::new(3.0f64, 4.0), Vec2::new(0.0, 0.0), 0.1, 0.0).unwrap();
        assert!((h - 0.5).abs() < 1e-15);
        assert!(hamiltonian(Vec2::new(f64::NAN, 0.0), Vec2::zero(), 0.1, 0.0).is_err());
    }

    #[test]
    fn hamiltonian_dominates_sampled_controls() {
        let grad = Vec2::new(-0.7, 1.3);
        let v = Vec2::new(0.2, -0.4);
        let h = hamiltonian(grad, v, 0.1, 0.05).unwrap();
        for k in 0..360 {
            let a = (k as f64).to_radians();
            let u = Vec2::new(a.cos(), a.sin()) * 0.1;
            assert!(grad.dot(v + u) + 0.05 <= h + 1e-15);
        }
    }

    #[test]
    fn cfl_examples() {
        let g = SpatialGrid::new(0.0, 0.0, 1000.0, 1000.0, 3, 3).unwrap();
        let dt = cfl_timestep(1.1f64, 1.1, &g, 0.5).unwrap().unwrap();
        assert!((dt - 227.2727).abs() < 1e-3);
        let g = SpatialGrid::new(0.0, 0.0, 500.0, 500.0, 3, 3).unwrap();
        assert_eq!(cfl_timestep(2.0, 0.0, &g, 0.5).unwrap(), Some(125.0));
        assert_eq!(cfl_timestep(2.0, 0.0, &g, 1.0).unwrap(), Some(250.0));
        assert_eq!(cfl_timestep(0.0, 0.0, &g, 0.5).unwrap(), None);
        assert!(cfl_timestep(-1.0, 0.0, &g, 0.5).is_err());
        assert!(cfl_timestep(1.0, 0.0, &g, 1.5).is_err());
    }
}
