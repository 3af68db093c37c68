use rayon::prelude::*;

use super::hamiltonian::{cfl_timestep, hamiltonian_raw};
use super::reward::{GriddedReward, RunningReward};
use super::value::{SolveConfig, SpatialScheme, TimeIntegrator, ValueFunction};
use crate::error::{invalid, Error, Result};
use crate::field::{FlowField, ScalarField, SpatialGrid, TimeAxis};
use crate::Real;

/// Integrates `-∂J/∂t = max_{‖u‖≤u_max} ∇J·(v + u) + γ  (- J/τ)` backward from
/// `t_end`, where `J(·, t_end)` is `terminal`, down to `t_start`.
///
/// Space is discretized with a local Lax-Friedrichs numerical Hamiltonian on
/// one-sided differences (first-order upwind by default, ENO2 on request);
/// edges use linearly extrapolated ghost values. Each explicit step is sized from the current flow so the scheme
/// stays monotone, and steps are shortened to land on every `output_time`
/// instant, which must start at `t_start` and end at `t_end`.
///
/// The solve grid is the terminal's grid. `flow` and `reward` may live on
/// other grids as long as they cover it and the window.
pub fn solve_backward<T, R>(
    flow: &FlowField<T>,
    reward: &R,
    terminal: &ScalarField<T>,
    t_start: T,
    t_end: T,
    config: &SolveConfig<T>,
    output_time: &TimeAxis<T>,
) -> Result<ValueFunction<T>>
where
    T: Real,
    R: RunningReward<T> + ?Sized,
{
    config.validate()?;
    if !(t_end > t_start) {
        return Err(invalid(format!("empty solve window [{t_start}, {t_end}]")));
    }
    if terminal.time.nt != 1 {
        return Err(invalid("terminal reward must be a single slice"));
    }
    let tol = output_time.tol();
    if output_time.nt < 2 || (output_time.t0 - t_start).abs() > tol || (output_time.t_end() - t_end).abs() > tol {
        return Err(invalid("output time axis must start at t_start and end at t_end"));
    }

    let grid = terminal.grid;
    let flow = flow.window_on(&grid, t_start, t_end)?;
    let reward = reward.on_grid(&grid, t_start, t_end)?;
    let (vx_field, vy_field) = flow.components();

    let n = grid.len();
    let nt = output_time.nt;
    let mut slices = vec![T::zero(); n * nt];
    let mut value = terminal.data().to_vec();
    slices[(nt - 1) * n..].copy_from_slice(&value);

    let mut stepper = Stepper {
        grid,
        config,
        vx: &vx_field,
        vy: &vy_field,
        reward: &reward,
        ws: Workspace::new(n),
    };

    let mut t = t_end;
    for k in (0..nt - 1).rev() {
        let target = if k == 0 { t_start } else { output_time.time(k) };
        while t > target {
            t = stepper.step(&mut value, t, target, tol)?;
        }
        slices[k * n..(k + 1) * n].copy_from_slice(&value);
    }

    let out_time = TimeAxis::new(t_start, output_time.dt, nt)?;
    let slices = ScalarField::new(grid, out_time, slices).map_err(|_| Error::SolverDiverged { t: t_start.as_f64() })?;
    Ok(ValueFunction::from_slices(slices, t_start, t_end, *config))
}

struct Workspace<T> {
    vx: Vec<T>,
    vy: Vec<T>,
    gamma: Vec<T>,
    rhs: Vec<T>,
    stage: Vec<T>,
}

impl<T: Real> Workspace<T> {
    fn new(n: usize) -> Self {
        Self {
            vx: vec![T::zero(); n],
            vy: vec![T::zero(); n],
            gamma: vec![T::zero(); n],
            rhs: vec![T::zero(); n],
            stage: vec![T::zero(); n],
        }
    }
}

struct Stepper<'a, T> {
    grid: SpatialGrid<T>,
    config: &'a SolveConfig<T>,
    vx: &'a ScalarField<T>,
    vy: &'a ScalarField<T>,
    reward: &'a GriddedReward<T>,
    ws: Workspace<T>,
}

impl<T: Real> Stepper<'_, T> {
    fn load_flow(&mut self, t: T) -> Result<(T, T)> {
        self.vx.slice_at_into(t, &mut self.ws.vx)?;
        self.vy.slice_at_into(t, &mut self.ws.vy)?;
        let sx = self.ws.vx.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let sy = self.ws.vy.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        Ok((sx, sy))
    }

    fn step_size(&self, sx: T, sy: T, t: T, target: T, tol: T) -> Result<T> {
        let u = self.config.u_max;
        let remaining = t - target;
        let dt = match cfl_timestep(sx + u, sy + u, &self.grid, self.config.cfl)? {
            Some(dt) if dt < remaining - tol => dt,
            _ => remaining,
        };
        Ok(dt)
    }

    /// Advances `value` from `t` to `t - dt`, never past `target`. Returns the new time.
    fn step(&mut self, value: &mut [T], t: T, target: T, tol: T) -> Result<T> {
        let (sx, sy) = self.load_flow(t)?;
        let mut dt = self.step_size(sx, sy, t, target, tol)?;
        let landing = |dt: T| if dt >= t - target { target } else { t - dt };
        let mut t_new = landing(dt);

        match self.config.integrator {
            TimeIntegrator::Euler => {
                self.reward.eval_into(t, (t_new, t), &mut self.ws.gamma)?;
                self.euler(value, dt);
            }
            TimeIntegrator::TvdRk2 => {
                // Both stages must respect the CFL bound.
                let (sx2, sy2) = self.load_flow(t_new)?;
                if sx2 > sx || sy2 > sy {
                    dt = dt.min(self.step_size(sx.max(sx2), sy.max(sy2), t, target, tol)?);
                    t_new = landing(dt);
                }
                let mut stage = std::mem::take(&mut self.ws.stage);
                stage.copy_from_slice(value);

                self.load_flow(t)?;
                self.reward.eval_into(t, (t_new, t), &mut self.ws.gamma)?;
                self.euler(&mut stage, dt);

                self.load_flow(t_new)?;
                self.reward.eval_into(t_new, (t_new, t), &mut self.ws.gamma)?;
                self.euler(&mut stage, dt);

                let half = T::lit(0.5);
                value
                    .par_iter_mut()
                    .zip(stage.par_iter())
                    .for_each(|(v, &s)| *v = half * (*v + s));
                self.ws.stage = stage;
            }
        }
        check_finite(value, t_new)?;
        Ok(t_new)
    }

    /// One explicit step in reversed time. With a discount the linear decay
    /// term is integrated exactly: `J ← e^{-dt/τ}·J + τ(1 - e^{-dt/τ})·L(J)`.
    fn euler(&mut self, value: &mut [T], dt: T) {
        llf_rhs(&self.grid, self.config.scheme, value, &self.ws.vx, &self.ws.vy, &self.ws.gamma, self.config.u_max, &mut self.ws.rhs);
        let (decay, weight) = match self.config.tau {
            Some(tau) => {
                let x = -dt / tau;
                (x.exp(), -tau * x.exp_m1())
            }
            None => (T::one(), dt),
        };
        let rhs = &self.ws.rhs;
        if decay == T::one() {
            value.par_iter_mut().zip(rhs.par_iter()).for_each(|(v, &r)| *v += weight * r);
        } else {
            value
                .par_iter_mut()
                .zip(rhs.par_iter())
                .for_each(|(v, &r)| *v = decay * *v + weight * r);
        }
    }
}

fn check_finite<T: Real>(value: &[T], t: T) -> Result<()> {
    if value.par_iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::SolverDiverged { t: t.as_f64() })
    }
}

/// Left and right one-sided derivatives at index `i` of a line of `n` values
/// with inverse spacing `inv_h`, read through `at`. Linear ghost extrapolation makes the
/// edge differences one-sided and their second differences vanish.
#[inline]
fn one_sided<T: Real>(scheme: SpatialScheme, i: usize, n: usize, inv_h: T, at: impl Fn(usize) -> T) -> (T, T) {
    let (dl, dr) = if i == 0 {
        let d = (at(1) - at(0)) * inv_h;
        (d, d)
    } else if i == n - 1 {
        let d = (at(i) - at(i - 1)) * inv_h;
        (d, d)
    } else {
        ((at(i) - at(i - 1)) * inv_h, (at(i + 1) - at(i)) * inv_h)
    };
    match scheme {
        SpatialScheme::Upwind1 => (dl, dr),
        SpatialScheme::Eno2 => {
            // Undivided second differences; zero on the edges.
            let d2 = |k: usize| {
                if k == 0 || k + 1 >= n {
                    T::zero()
                } else {
                    at(k + 1) - at(k) - at(k) + at(k - 1)
                }
            };
            let eno = |a: T, b: T| if a.abs() <= b.abs() { a } else { b };
            let half = T::lit(0.5) * inv_h;
            let c = d2(i);
            let l = if i == 0 { T::zero() } else { eno(d2(i - 1), c) };
            let r = eno(c, d2(i + 1));
            (dl + half * l, dr - half * r)
        }
    }
}

/// `Ĥ + γ` at every node, where
/// `Ĥ = H(p̄) + αx(p⁺x - p⁻x)/2 + αy(p⁺y - p⁻y)/2`, `p̄` the mean of the one-sided
/// differences and `α` the largest `|v_axis| + u_max` over the axis stencil.
#[allow(clippy::too_many_arguments)]
fn llf_rhs<T: Real>(
    grid: &SpatialGrid<T>,
    scheme: SpatialScheme,
    j: &[T],
    vx: &[T],
    vy: &[T],
    gamma: &[T],
    u_max: T,
    out: &mut [T],
) {
    let (nx, ny) = (grid.nx, grid.ny);
    let inv_dx = T::one() / grid.dx;
    let inv_dy = T::one() / grid.dy;
    let half = T::lit(0.5);
    out.par_chunks_mut(nx).enumerate().for_each(|(row, out_row)| {
        let base = row * nx;
        for (i, o) in out_row.iter_mut().enumerate() {
            let c = base + i;
            let (dl, dr) = one_sided(scheme, i, nx, inv_dx, |k| j[base + k]);
            let (dd, du) = one_sided(scheme, row, ny, inv_dy, |k| j[k * nx + i]);

            let mut ax = vx[c].abs();
            if i > 0 {
                ax = ax.max(vx[c - 1].abs());
            }
            if i + 1 < nx {
                ax = ax.max(vx[c + 1].abs());
            }
            let mut ay = vy[c].abs();
            if row > 0 {
                ay = ay.max(vy[c - nx].abs());
            }
            if row + 1 < ny {
                ay = ay.max(vy[c + nx].abs());
            }
            ax += u_max;
            ay += u_max;

            let px = half * (dl + dr);
            let py = half * (dd + du);
            let h = hamiltonian_raw(px, py, vx[c], vy[c], u_max);
            *o = h + half * (ax * (dr - dl) + ay * (du - dd)) + gamma[c];
        }
    });
}
