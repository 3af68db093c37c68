use crate::error::{invalid, Error, Result};
use crate::field::FlowField;
use crate::policy::Control;
use crate::{Real, Vec2};

/// One classical RK4 step of `ẋ = v(x, t) + u` with `u` held over the step.
///
/// Returns `None` when any stage samples outside the truth field, which the
/// caller treats as leaving the domain.
pub fn step_vessel<T: Real>(x: Vec2<T>, u: Control<T>, t: T, dt: T, truth: &FlowField<T>) -> Result<Option<Vec2<T>>> {
    if !(dt > T::zero()) {
        return Err(invalid(format!("dt must be > 0, got {dt}")));
    }
    let u = u.as_vec();
    let f = |p: Vec2<T>, s: T| match truth.sample(p, s) {
        Ok(v) => Ok(Some(v + u)),
        Err(Error::OutOfDomain { .. }) => Ok(None),
        Err(e) => Err(e),
    };
    let half = dt * T::lit(0.5);
    let Some(k1) = f(x, t)? else { return Ok(None) };
    let Some(k2) = f(x + k1 * half, t + half)? else { return Ok(None) };
    let Some(k3) = f(x + k2 * half, t + half)? else { return Ok(None) };
    let Some(k4) = f(x + k3 * dt, t + dt)? else { return Ok(None) };
    let next = x + (k1 + k2 * T::lit(2.0) + k3 * T::lit(2.0) + k4) * (dt / T::lit(6.0));
    if !truth.grid.contains(next) {
        return Ok(None);
    }
    Ok(Some(next))
}
