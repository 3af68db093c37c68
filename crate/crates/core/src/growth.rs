//! Seaweed growth factor and exponential mass evolution.
//!
//! The net growth rate is a gross photosynthetic rate gated by an optional
//! square-wave light cycle, minus a constant respiration rate.

use crate::error::{invalid, Result};
use crate::field::ScalarField;
use crate::{Real, Vec2};

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Square-wave day/night cycle: light during the first `light_fraction` of each period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightCycle<T> {
    pub day_length: T,
    pub light_fraction: T,
}

impl<T: Real> LightCycle<T> {
    pub fn new(day_length: T, light_fraction: T) -> Result<Self> {
        if !(day_length > T::zero()) {
            return Err(invalid(format!("day_length must be positive, got {day_length}")));
        }
        if !(light_fraction > T::zero() && light_fraction <= T::one()) {
            return Err(invalid(format!("light_fraction must be in (0, 1], got {light_fraction}")));
        }
        Ok(Self {
            day_length,
            light_fraction,
        })
    }

    /// 1 while photosynthesis is active, 0 otherwise.
    #[inline]
    pub fn light(&self, t: T) -> T {
        let phase = (t % self.day_length + self.day_length) % self.day_length;
        if phase < self.light_fraction * self.day_length {
            T::one()
        } else {
            T::zero()
        }
    }

    /// Total lit time in `[0, t]` (negative for `t < 0`).
    fn lit_time(&self, t: T) -> T {
        let periods = (t / self.day_length).floor();
        let phase = t - periods * self.day_length;
        periods * self.light_fraction * self.day_length + phase.min(self.light_fraction * self.day_length)
    }

    /// Fraction of `[t_a, t_b]` that is lit; the point value when the interval is empty.
    pub fn mean_light(&self, t_a: T, t_b: T) -> T {
        if t_b <= t_a {
            return self.light(t_b);
        }
        ((self.lit_time(t_b) - self.lit_time(t_a)) / (t_b - t_a)).max(T::zero()).min(T::one())
    }
}

#[derive(Debug, Clone)]
pub struct GrowthModel<T> {
    /// Gross growth rate `r_growth` (1/s).
    pub gross: ScalarField<T>,
    /// Respiration rate `r_resp` (1/s).
    pub resp_rate: T,
    /// `None` keeps photosynthesis on around the clock.
    pub light: Option<LightCycle<T>>,
}

impl<T: Real> GrowthModel<T> {
    pub fn new(gross: ScalarField<T>, resp_rate: T, light: Option<LightCycle<T>>) -> Result<Self> {
        if !(resp_rate >= T::zero()) || !resp_rate.is_finite() {
            return Err(invalid(format!("respiration rate must be >= 0, got {resp_rate}")));
        }
        Ok(Self { gross, resp_rate, light })
    }

    /// Diurnal model with the standard 24 h period.
    pub fn diurnal(gross: ScalarField<T>, resp_rate: T, light_fraction: T) -> Result<Self> {
        Self::new(gross, resp_rate, Some(LightCycle::new(T::lit(SECONDS_PER_DAY), light_fraction)?))
    }

    #[inline]
    pub fn light(&self, t: T) -> T {
        self.light.map_or(T::one(), |c| c.light(t))
    }

    /// Net growth rate γ(x, t) in 1/s.
    pub fn growth_factor(&self, p: Vec2<T>, t: T) -> Result<T> {
        Ok(self.gross.sample(p, t)? * self.light(t) - self.resp_rate)
    }

    /// `∫γ dt` over a straight segment: trapezoid on the gross rate times the
    /// exact lit fraction of `[t0, t1]`, minus respiration.
    pub fn log_growth(&self, (t0, p0): (T, Vec2<T>), (t1, p1): (T, Vec2<T>)) -> Result<T> {
        let gross = (self.gross.sample(p0, t0)? + self.gross.sample(p1, t1)?) * T::lit(0.5);
        let lit = self.light.map_or(T::one(), |c| c.mean_light(t0, t1));
        Ok((gross * lit - self.resp_rate) * (t1 - t0))
    }
}

/// Mass along a time-stamped trajectory, `m(t_{k+1}) = m(t_k)·exp(∫γ)` with
/// the integral taken segment by segment as in [`GrowthModel::log_growth`].
pub fn integrate_mass<T: Real>(gm: &GrowthModel<T>, trajectory: &[(T, Vec2<T>)], m0: T) -> Result<Vec<T>> {
    if !(m0 > T::zero()) {
        return Err(invalid(format!("initial mass must be positive, got {m0}")));
    }
    let mut masses = Vec::with_capacity(trajectory.len());
    let Some(&(t_first, p_first)) = trajectory.first() else {
        return Ok(masses);
    };
    gm.gross.sample(p_first, t_first)?;
    let mut m = m0;
    masses.push(m);
    for w in trajectory.windows(2) {
        if w[1].0 < w[0].0 {
            return Err(invalid("trajectory is not time-ordered"));
        }
        m = m * gm.log_growth(w[0], w[1])?.exp();
        masses.push(m);
    }
    Ok(masses)
}

/// One trapezoid step of the exponential mass ODE.
#[inline]
pub fn mass_step<T: Real>(m: T, g0: T, g1: T, dt: T) -> T {
    m * ((g0 + g1) * T::lit(0.5) * dt).exp()
}

/// Final mass implied by a log-mass value: `m0·e^J`.
pub fn mass_from_value<T: Real>(m0: T, value: T) -> Result<T> {
    if !(m0 > T::zero()) {
        return Err(invalid(format!("initial mass must be positive, got {m0}")));
    }
    Ok(m0 * value.exp())
}
