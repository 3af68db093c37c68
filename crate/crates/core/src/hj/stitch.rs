use serde::{Deserialize, Serialize};

use super::reward::RunningReward;
use super::solver::solve_backward;
use super::value::{SolveConfig, ValueFunction};
use crate::error::{invalid, Result};
use crate::field::{FlowField, ScalarField, SpatialGrid, TimeAxis};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StitchOptions<T> {
    /// Retained slice spacing for both stages (s).
    pub output_dt: T,
    /// Apply the config's discount in the coarse continuation stage.
    pub discount_coarse: bool,
    /// Apply the config's discount in the fine forecast stage.
    pub discount_fine: bool,
}

impl<T: Real> Default for StitchOptions<T> {
    fn default() -> Self {
        Self {
            output_dt: T::lit(3600.0),
            discount_coarse: true,
            discount_fine: true,
        }
    }
}

impl<T: Real> StitchOptions<T> {
    pub(crate) fn stage_config(&self, config: &SolveConfig<T>, coarse: bool) -> SolveConfig<T> {
        let keep = if coarse { self.discount_coarse } else { self.discount_fine };
        let mut c = *config;
        if !keep {
            c.tau = None;
        }
        c
    }
}

/// Zero terminal reward on `grid` (a single slice stamped at `t`).
pub fn zero_terminal<T: Real>(grid: &SpatialGrid<T>, t: T) -> Result<ScalarField<T>> {
    ScalarField::constant(*grid, TimeAxis::new(t, T::one(), 1)?, T::zero())
}

/// Slice of `coarse` at time `t`, evaluated at the nodes of `fine_grid`.
pub fn terminal_from_coarse<T: Real>(coarse: &ValueFunction<T>, fine_grid: &SpatialGrid<T>, t: T) -> Result<ScalarField<T>> {
    if !coarse.grid().contains_box(fine_grid) {
        return Err(invalid("fine grid extends beyond the coarse value function"));
    }
    let data = fine_grid
        .nodes()
        .map(|p| coarse.value_at(p, t))
        .collect::<Result<Vec<_>>>()?;
    ScalarField::new(*fine_grid, TimeAxis::new(t, T::one(), 1)?, data)
}

/// Coarse continuation solve over `[t_fc, t_ext]` with zero terminal reward on
/// the average-flow grid.
pub fn solve_continuation<T, R>(
    avg_flow: &FlowField<T>,
    growth_coarse: &R,
    t_fc: T,
    t_ext: T,
    config: &SolveConfig<T>,
    opts: &StitchOptions<T>,
) -> Result<ValueFunction<T>>
where
    T: Real,
    R: RunningReward<T> + ?Sized,
{
    let grid = avg_flow.grid;
    solve_backward(
        avg_flow,
        growth_coarse,
        &zero_terminal(&grid, t_ext)?,
        t_fc,
        t_ext,
        &opts.stage_config(config, true),
        &TimeAxis::spanning(t_fc, t_ext, opts.output_dt)?,
    )
}

/// Fine forecast-window solve over `[t_start, t_fc]` whose terminal reward is
/// the continuation value at `t_fc` carried onto the forecast grid.
pub fn solve_with_continuation<T, R>(
    forecast_flow: &FlowField<T>,
    growth_fine: &R,
    continuation: &ValueFunction<T>,
    t_start: T,
    t_fc: T,
    config: &SolveConfig<T>,
    opts: &StitchOptions<T>,
) -> Result<ValueFunction<T>>
where
    T: Real,
    R: RunningReward<T> + ?Sized,
{
    let grid = forecast_flow.grid;
    let terminal = terminal_from_coarse(continuation, &grid, t_fc)?;
    solve_backward(
        forecast_flow,
        growth_fine,
        &terminal,
        t_start,
        t_fc,
        &opts.stage_config(config, false),
        &TimeAxis::spanning(t_start, t_fc, opts.output_dt)?,
    )
}

/// Two-horizon value: a coarse solve on average currents over `[t_fc, t_ext]`
/// supplies the terminal reward of a fine solve on the forecast over
/// `[t_start, t_fc]`. The result lives on the forecast grid and estimates the
/// value over the whole extended horizon.
#[allow(clippy::too_many_arguments)]
pub fn stitch_long_horizon<T, Rc, Rf>(
    avg_flow: &FlowField<T>,
    forecast_flow: &FlowField<T>,
    growth_coarse: &Rc,
    growth_fine: &Rf,
    t_start: T,
    t_fc: T,
    t_ext: T,
    config: &SolveConfig<T>,
    opts: &StitchOptions<T>,
) -> Result<ValueFunction<T>>
where
    T: Real,
    Rc: RunningReward<T> + ?Sized,
    Rf: RunningReward<T> + ?Sized,
{
    if !(t_ext > t_fc && t_fc > t_start) {
        return Err(invalid(format!(
            "stitching needs t_start < t_fc < t_ext, got {t_start}, {t_fc}, {t_ext}"
        )));
    }
    if !avg_flow.grid.contains_box(&forecast_flow.grid) {
        return Err(invalid("forecast grid is not contained in the average-currents grid"));
    }
    let continuation = solve_continuation(avg_flow, growth_coarse, t_fc, t_ext, config, opts)?;
    solve_with_continuation(forecast_flow, growth_fine, &continuation, t_start, t_fc, config, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport<T> {
    /// `max(J_disc - J_plain)` over every node of every retained slice.
    pub max_excess: T,
    /// Mean of `J_disc / J_plain` over start-slice nodes with `J_plain > 0`.
    pub start_ratio_mean: T,
}

/// Compares a discounted value function against the undiscounted solve of the
/// same scenario; with nonnegative reward and zero terminal, discounting can
/// only shrink the value, so `max_excess` should not exceed solver noise.
pub fn discount_envelope_check<T: Real>(vf_disc: &ValueFunction<T>, vf_plain: &ValueFunction<T>) -> Result<EnvelopeReport<T>> {
    if vf_disc.grid() != vf_plain.grid() || vf_disc.time() != vf_plain.time() {
        return Err(invalid("value functions live on different grids"));
    }
    if vf_disc.config.tau.is_none() {
        return Err(invalid("first value function is not discounted"));
    }
    let (a, b) = (vf_disc.materialize(), vf_plain.materialize());
    let max_excess = a
        .data()
        .iter()
        .zip(b.data())
        .fold(T::neg_infinity(), |m, (&d, &p)| m.max(d - p));
    let (sum, count) = vf_disc
        .start_slice()
        .iter()
        .zip(vf_plain.start_slice())
        .filter(|(_, p)| *p > T::zero())
        .fold((T::zero(), 0usize), |(s, c), (&d, p)| (s + d / p, c + 1));
    let start_ratio_mean = if count == 0 {
        T::nan()
    } else {
        sum / T::from_usize(count).unwrap()
    };
    Ok(EnvelopeReport {
        max_excess,
        start_ratio_mean,
    })
}
