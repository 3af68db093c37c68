use rayon::prelude::*;

use super::grid::{CellLoc, SpatialGrid, TimeAxis, TimeLoc};
use crate::error::{invalid, Error, Result};
use crate::{Real, Vec2};

/// Time-stamped stack of scalar grids, stored time-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    pub grid: SpatialGrid<T>,
    pub time: TimeAxis<T>,
    data: Vec<T>,
}

/// Time-stamped stack of planar vector grids.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField<T> {
    pub grid: SpatialGrid<T>,
    pub time: TimeAxis<T>,
    u: Vec<T>,
    v: Vec<T>,
}

fn check_payload<T: Real>(name: &str, grid: &SpatialGrid<T>, time: &TimeAxis<T>, data: &[T]) -> Result<()> {
    let want = grid.len() * time.nt;
    if data.len() != want {
        return Err(invalid(format!(
            "{name} has {} entries, grid and time axis need {want}",
            data.len()
        )));
    }
    if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!("{name}[{pos}] is not finite")));
    }
    Ok(())
}

#[inline]
fn lerp<T: Real>(a: T, b: T, w: T) -> T {
    if w == T::zero() {
        a
    } else if w == T::one() {
        b
    } else {
        a + (b - a) * w
    }
}

#[inline]
fn bilinear<T: Real>(slice: &[T], grid: &SpatialGrid<T>, c: &CellLoc<T>) -> T {
    let base = grid.index(c.i, c.j);
    let nx = grid.nx;
    let bottom = lerp(slice[base], slice[base + 1], c.wx);
    let top = lerp(slice[base + nx], slice[base + nx + 1], c.wx);
    lerp(bottom, top, c.wy)
}

#[inline]
pub(crate) fn interp<T: Real>(data: &[T], grid: &SpatialGrid<T>, c: &CellLoc<T>, tl: &TimeLoc<T>) -> T {
    let n = grid.len();
    let a = bilinear(&data[tl.k * n..(tl.k + 1) * n], grid, c);
    if tl.w == T::zero() {
        return a;
    }
    let b = bilinear(&data[(tl.k + 1) * n..(tl.k + 2) * n], grid, c);
    lerp(a, b, tl.w)
}

fn out_of_domain<T: Real>(p: Vec2<T>, t: T) -> Error {
    Error::OutOfDomain {
        x: p.x.as_f64(),
        y: p.y.as_f64(),
        t: t.as_f64(),
    }
}

pub(crate) fn locate_both<T: Real>(
    grid: &SpatialGrid<T>,
    time: &TimeAxis<T>,
    p: Vec2<T>,
    t: T,
) -> Result<(CellLoc<T>, TimeLoc<T>)> {
    match (grid.locate(p), time.locate(t)) {
        (Some(c), Some(tl)) => Ok((c, tl)),
        _ => Err(out_of_domain(p, t)),
    }
}

/// Fills a `target_time × target_grid` payload by evaluating `eval` at every node.
fn fill_nodes<T: Real>(
    grid: &SpatialGrid<T>,
    time: &TimeAxis<T>,
    eval: impl Fn(Vec2<T>, T) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let n = grid.len();
    let mut out = vec![T::zero(); n * time.nt];
    out.par_chunks_mut(n)
        .enumerate()
        .try_for_each(|(k, slice)| -> Result<()> {
            let t = time.time(k);
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    slice[grid.index(i, j)] = eval(grid.node(i, j), t)?;
                }
            }
            Ok(())
        })?;
    Ok(out)
}

fn check_resample_target<T: Real>(
    src_grid: &SpatialGrid<T>,
    src_time: &TimeAxis<T>,
    grid: &SpatialGrid<T>,
    time: &TimeAxis<T>,
) -> Result<()> {
    if !src_grid.contains_box(grid) {
        return Err(Error::OutOfDomain {
            x: grid.x_max().as_f64(),
            y: grid.y_max().as_f64(),
            t: time.t0.as_f64(),
        });
    }
    if !src_time.contains(time.t0) || !src_time.contains(time.t_end()) {
        return Err(Error::OutOfDomain {
            x: grid.x0.as_f64(),
            y: grid.y0.as_f64(),
            t: time.t_end().as_f64(),
        });
    }
    Ok(())
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: SpatialGrid<T>, time: TimeAxis<T>, data: Vec<T>) -> Result<Self> {
        check_payload("data", &grid, &time, &data)?;
        Ok(Self { grid, time, data })
    }

    pub fn constant(grid: SpatialGrid<T>, time: TimeAxis<T>, value: T) -> Result<Self> {
        Self::new(grid, time, vec![value; grid.len() * time.nt])
    }

    /// Evaluates `f(node, t)` at every space-time node.
    pub fn from_fn(grid: SpatialGrid<T>, time: TimeAxis<T>, f: impl Fn(Vec2<T>, T) -> T + Sync) -> Result<Self> {
        let data = fill_nodes(&grid, &time, |p, t| Ok(f(p, t)))?;
        Self::new(grid, time, data)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn slice(&self, k: usize) -> &[T] {
        let n = self.grid.len();
        &self.data[k * n..(k + 1) * n]
    }

    /// Single-slice field holding slice `k`.
    pub fn slice_field(&self, k: usize) -> Self {
        let time = TimeAxis {
            t0: self.time.time(k),
            dt: self.time.dt,
            nt: 1,
        };
        Self {
            grid: self.grid,
            time,
            data: self.slice(k).to_vec(),
        }
    }

    #[inline]
    pub fn at(&self, k: usize, i: usize, j: usize) -> T {
        self.data[k * self.grid.len() + self.grid.index(i, j)]
    }

    /// Bilinear in space, linear in time. Never clamps: queries outside the
    /// space-time box are an error.
    pub fn sample(&self, p: Vec2<T>, t: T) -> Result<T> {
        let (c, tl) = locate_both(&self.grid, &self.time, p, t)?;
        Ok(interp(&self.data, &self.grid, &c, &tl))
    }

    /// Re-evaluates the field on another grid and time axis inside its own box.
    pub fn resample(&self, grid: &SpatialGrid<T>, time: &TimeAxis<T>) -> Result<Self> {
        check_resample_target(&self.grid, &self.time, grid, time)?;
        let data = fill_nodes(grid, time, |p, t| self.sample(p, t))?;
        Self::new(*grid, *time, data)
    }

    /// Resamples in time with query times clamped into this field's span.
    pub fn resample_time_clamped(&self, time: &TimeAxis<T>) -> Result<Self> {
        let (lo, hi) = (self.time.t0, self.time.t_end());
        let data = fill_nodes(&self.grid, time, |p, t| self.sample(p, t.max(lo).min(hi)))?;
        Self::new(self.grid, *time, data)
    }

    /// The source slices bracketing `[t_a, t_b]`, carried onto `grid`.
    pub(crate) fn window_on(&self, grid: &SpatialGrid<T>, t_a: T, t_b: T) -> Result<Self> {
        let (k0, k1) = self
            .time
            .bracket(t_a, t_b)
            .ok_or_else(|| out_of_domain(Vec2::new(grid.x0, grid.y0), if self.time.contains(t_a) { t_b } else { t_a }))?;
        let time = TimeAxis {
            t0: self.time.time(k0),
            dt: self.time.dt,
            nt: k1 - k0 + 1,
        };
        if *grid == self.grid {
            let n = grid.len();
            return Self::new(*grid, time, self.data[k0 * n..(k1 + 1) * n].to_vec());
        }
        self.resample(grid, &time)
    }

    /// Writes slice values interpolated linearly to time `t` into `out`.
    /// `t` must lie within the time axis (up to snapping tolerance).
    pub(crate) fn slice_at_into(&self, t: T, out: &mut [T]) -> Result<()> {
        let tl = self
            .time
            .locate(t)
            .ok_or_else(|| out_of_domain(Vec2::new(self.grid.x0, self.grid.y0), t))?;
        let a = self.slice(tl.k);
        if tl.w == T::zero() {
            out.copy_from_slice(a);
        } else {
            let b = self.slice(tl.k + 1);
            for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
                *o = lerp(x, y, tl.w);
            }
        }
        Ok(())
    }

    pub fn min_max(&self) -> (T, T) {
        self.data
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

impl<T: Real> FlowField<T> {
    pub fn new(grid: SpatialGrid<T>, time: TimeAxis<T>, u: Vec<T>, v: Vec<T>) -> Result<Self> {
        check_payload("u_comp", &grid, &time, &u)?;
        check_payload("v_comp", &grid, &time, &v)?;
        Ok(Self { grid, time, u, v })
    }

    pub fn constant(grid: SpatialGrid<T>, time: TimeAxis<T>, vel: Vec2<T>) -> Result<Self> {
        let n = grid.len() * time.nt;
        Self::new(grid, time, vec![vel.x; n], vec![vel.y; n])
    }

    pub fn from_fn(grid: SpatialGrid<T>, time: TimeAxis<T>, f: impl Fn(Vec2<T>, T) -> Vec2<T> + Sync) -> Result<Self> {
        let u = fill_nodes(&grid, &time, |p, t| Ok(f(p, t).x))?;
        let v = fill_nodes(&grid, &time, |p, t| Ok(f(p, t).y))?;
        Self::new(grid, time, u, v)
    }

    pub fn from_components(u: ScalarField<T>, v: ScalarField<T>) -> Result<Self> {
        if u.grid != v.grid || u.time != v.time {
            return Err(invalid("flow components live on different grids"));
        }
        Ok(Self {
            grid: u.grid,
            time: u.time,
            u: u.data,
            v: v.data,
        })
    }

    pub fn u_data(&self) -> &[T] {
        &self.u
    }

    pub fn v_data(&self) -> &[T] {
        &self.v
    }

    pub fn components(&self) -> (ScalarField<T>, ScalarField<T>) {
        (
            ScalarField {
                grid: self.grid,
                time: self.time,
                data: self.u.clone(),
            },
            ScalarField {
                grid: self.grid,
                time: self.time,
                data: self.v.clone(),
            },
        )
    }

    pub fn sample(&self, p: Vec2<T>, t: T) -> Result<Vec2<T>> {
        let (c, tl) = locate_both(&self.grid, &self.time, p, t)?;
        Ok(Vec2::new(
            interp(&self.u, &self.grid, &c, &tl),
            interp(&self.v, &self.grid, &c, &tl),
        ))
    }

    pub fn resample(&self, grid: &SpatialGrid<T>, time: &TimeAxis<T>) -> Result<Self> {
        let (u, v) = self.components();
        Self::from_components(u.resample(grid, time)?, v.resample(grid, time)?)
    }

    pub fn resample_time_clamped(&self, time: &TimeAxis<T>) -> Result<Self> {
        let (u, v) = self.components();
        Self::from_components(u.resample_time_clamped(time)?, v.resample_time_clamped(time)?)
    }

    pub(crate) fn window_on(&self, grid: &SpatialGrid<T>, t_a: T, t_b: T) -> Result<Self> {
        let (u, v) = self.components();
        Self::from_components(u.window_on(grid, t_a, t_b)?, v.window_on(grid, t_a, t_b)?)
    }

    /// Pointwise sum with another flow on the identical grid and time axis.
    pub fn add(&self, other: &FlowField<T>) -> Result<Self> {
        if self.grid != other.grid || self.time != other.time {
            return Err(invalid("cannot add flows on different grids"));
        }
        let u = self.u.iter().zip(&other.u).map(|(&a, &b)| a + b).collect();
        let v = self.v.iter().zip(&other.v).map(|(&a, &b)| a + b).collect();
        Self::new(self.grid, self.time, u, v)
    }

    /// Largest speed magnitude over all nodes and slices.
    pub fn max_speed(&self) -> T {
        self.u
            .iter()
            .zip(&self.v)
            .fold(T::zero(), |m, (&a, &b)| m.max(a.hypot(b)))
    }
}
