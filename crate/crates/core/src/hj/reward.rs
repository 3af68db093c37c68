use crate::error::Result;
use crate::field::{ScalarField, SpatialGrid};
use crate::growth::{GrowthModel, LightCycle};
use crate::Real;

/// Anything that can supply the running reward γ on a solve grid.
pub trait RunningReward<T: Real>: Sync {
    /// Prepares the reward over `[t_a, t_b]` on `grid`.
    fn on_grid(&self, grid: &SpatialGrid<T>, t_a: T, t_b: T) -> Result<GriddedReward<T>>;
}

/// Reward carried onto a solve grid, evaluated per step.
#[derive(Debug, Clone)]
pub struct GriddedReward<T> {
    field: ScalarField<T>,
    light: Option<LightCycle<T>>,
    resp: T,
}

impl<T: Real> GriddedReward<T> {
    /// Rate field at `t` with the light gate replaced by its exact mean over
    /// the step `[t_lo, t_hi]`.
    pub(crate) fn eval_into(&self, t: T, (t_lo, t_hi): (T, T), out: &mut [T]) -> Result<()> {
        self.field.slice_at_into(t, out)?;
        if let Some(cycle) = self.light {
            let gate = cycle.mean_light(t_lo, t_hi);
            out.iter_mut().for_each(|g| *g = *g * gate - self.resp);
        } else if self.resp != T::zero() {
            out.iter_mut().for_each(|g| *g -= self.resp);
        }
        Ok(())
    }
}

impl<T: Real> RunningReward<T> for ScalarField<T> {
    fn on_grid(&self, grid: &SpatialGrid<T>, t_a: T, t_b: T) -> Result<GriddedReward<T>> {
        Ok(GriddedReward {
            field: self.window_on(grid, t_a, t_b)?,
            light: None,
            resp: T::zero(),
        })
    }
}

impl<T: Real> RunningReward<T> for GrowthModel<T> {
    fn on_grid(&self, grid: &SpatialGrid<T>, t_a: T, t_b: T) -> Result<GriddedReward<T>> {
        Ok(GriddedReward {
            field: self.gross.window_on(grid, t_a, t_b)?,
            light: self.light,
            resp: self.resp_rate,
        })
    }
}
