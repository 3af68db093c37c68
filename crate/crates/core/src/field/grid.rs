use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::{Real, Vec2};

/// Uniform rectilinear mesh; node `(i, j)` sits at `(x0 + i·dx, y0 + j·dy)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid<T> {
    pub x0: T,
    pub y0: T,
    pub dx: T,
    pub dy: T,
    pub nx: usize,
    pub ny: usize,
}

/// Bilinear stencil of a query point: lower-left node and fractional offsets.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CellLoc<T> {
    pub i: usize,
    pub j: usize,
    pub wx: T,
    pub wy: T,
}

impl<T: Real> SpatialGrid<T> {
    pub fn new(x0: T, y0: T, dx: T, dy: T, nx: usize, ny: usize) -> Result<Self> {
        if !(dx > T::zero() && dy > T::zero()) || !dx.is_finite() || !dy.is_finite() {
            return Err(invalid(format!("grid spacing must be positive, got dx={dx}, dy={dy}")));
        }
        if nx < 2 || ny < 2 {
            return Err(invalid(format!("grid needs at least 2x2 nodes, got {nx}x{ny}")));
        }
        if !x0.is_finite() || !y0.is_finite() {
            return Err(invalid("grid origin must be finite"));
        }
        Ok(Self { x0, y0, dx, dy, nx, ny })
    }

    /// Grid with `nx × ny` nodes spanning `[x0, x1] × [y0, y1]` exactly.
    pub fn spanning(x0: T, y0: T, x1: T, y1: T, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(invalid(format!("grid needs at least 2x2 nodes, got {nx}x{ny}")));
        }
        let dx = (x1 - x0) / T::from_usize(nx - 1).unwrap();
        let dy = (y1 - y0) / T::from_usize(ny - 1).unwrap();
        Self::new(x0, y0, dx, dy, nx, ny)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn x_max(&self) -> T {
        self.x0 + self.dx * T::from_usize(self.nx - 1).unwrap()
    }

    #[inline]
    pub fn y_max(&self) -> T {
        self.y0 + self.dy * T::from_usize(self.ny - 1).unwrap()
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2<T> {
        Vec2::new(
            self.x0 + self.dx * T::from_usize(i).unwrap(),
            self.y0 + self.dy * T::from_usize(j).unwrap(),
        )
    }

    /// Row-major (y outer, x inner) flat index.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec2<T>> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.node(i, j)))
    }

    fn tol_x(&self) -> T {
        T::snap_tol() * (self.dx + self.x0.abs() + self.x_max().abs())
    }

    fn tol_y(&self) -> T {
        T::snap_tol() * (self.dy + self.y0.abs() + self.y_max().abs())
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        let (tx, ty) = (self.tol_x(), self.tol_y());
        p.x >= self.x0 - tx && p.x <= self.x_max() + tx && p.y >= self.y0 - ty && p.y <= self.y_max() + ty
    }

    /// Whether `other`'s bounding box lies inside this one.
    pub fn contains_box(&self, other: &SpatialGrid<T>) -> bool {
        self.contains(Vec2::new(other.x0, other.y0)) && self.contains(Vec2::new(other.x_max(), other.y_max()))
    }

    /// Shortest distance from `p` to the box boundary (negative outside).
    pub fn border_distance(&self, p: Vec2<T>) -> T {
        (p.x - self.x0).min(self.x_max() - p.x).min(p.y - self.y0).min(self.y_max() - p.y)
    }

    pub(crate) fn locate(&self, p: Vec2<T>) -> Option<CellLoc<T>> {
        if !p.is_finite() || !self.contains(p) {
            return None;
        }
        let (i, wx) = split_axis((p.x - self.x0) / self.dx, self.nx);
        let (j, wy) = split_axis((p.y - self.y0) / self.dy, self.ny);
        Some(CellLoc { i, j, wx, wy })
    }
}

/// Splits a fractional node coordinate into a cell index in `[0, n-2]` and a weight in `[0, 1]`.
#[inline]
fn split_axis<T: Real>(f: T, n: usize) -> (usize, T) {
    let last = n - 2;
    let fl = f.floor().max(T::zero());
    let mut i = fl.to_usize().unwrap_or(0);
    if i > last {
        i = last;
    }
    let w = (f - T::from_usize(i).unwrap()).max(T::zero()).min(T::one());
    (i, w)
}

/// Uniformly spaced time instants `t0 + k·dt`, `k < nt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis<T> {
    pub t0: T,
    pub dt: T,
    pub nt: usize,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct TimeLoc<T> {
    pub k: usize,
    pub w: T,
}

impl<T: Real> TimeAxis<T> {
    pub fn new(t0: T, dt: T, nt: usize) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() || !t0.is_finite() {
            return Err(invalid(format!("time spacing must be positive, got dt={dt}")));
        }
        if nt == 0 {
            return Err(invalid("time axis needs at least one slice"));
        }
        Ok(Self { t0, dt, nt })
    }

    /// Fewest uniform slices covering `[t_start, t_end]` with spacing at most `max_dt`;
    /// the first and last instants are the window ends.
    pub fn spanning(t_start: T, t_end: T, max_dt: T) -> Result<Self> {
        let span = t_end - t_start;
        if !(span > T::zero()) || !(max_dt > T::zero()) {
            return Err(invalid(format!(
                "cannot span [{t_start}, {t_end}] with step {max_dt}"
            )));
        }
        let steps = (span / max_dt - T::snap_tol()).ceil().max(T::one());
        let steps = steps.to_usize().unwrap();
        Self::new(t_start, span / T::from_usize(steps).unwrap(), steps + 1)
    }

    #[inline]
    pub fn time(&self, k: usize) -> T {
        self.t0 + self.dt * T::from_usize(k).unwrap()
    }

    #[inline]
    pub fn t_end(&self) -> T {
        self.time(self.nt - 1)
    }

    pub fn tol(&self) -> T {
        T::snap_tol() * (self.dt + self.t0.abs() + self.t_end().abs())
    }

    pub fn contains(&self, t: T) -> bool {
        let tol = self.tol();
        t >= self.t0 - tol && t <= self.t_end() + tol
    }

    pub(crate) fn locate(&self, t: T) -> Option<TimeLoc<T>> {
        if !t.is_finite() || !self.contains(t) {
            return None;
        }
        if self.nt == 1 {
            return Some(TimeLoc { k: 0, w: T::zero() });
        }
        let (k, w) = split_axis((t - self.t0) / self.dt, self.nt);
        Some(TimeLoc { k, w })
    }

    /// Index range of the slices bracketing `[t_a, t_b]`.
    pub(crate) fn bracket(&self, t_a: T, t_b: T) -> Option<(usize, usize)> {
        let a = self.locate(t_a)?;
        let b = self.locate(t_b)?;
        let hi = if b.w > T::zero() { b.k + 1 } else { b.k };
        Some((a.k, hi.max(a.k)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_grid_spans() {
        let g = SpatialGrid::new(0.0, 0.0, 1.0, 1.0, 3, 3).unwrap();
        assert_eq!((g.x_max(), g.y_max()), (2.0, 2.0));
        let g = SpatialGrid::new(-1.0, -1.0, 0.5, 0.5, 5, 5).unwrap();
        assert_eq!((g.x0, g.x_max(), g.y0, g.y_max()), (-1.0, 1.0, -1.0, 1.0));
        assert_eq!(g.nodes().count(), 25);
    }

    #[test]
    fn build_grid_rejects_bad_args() {
        assert!(matches!(
            SpatialGrid::new(0.0, 0.0, 0.0, 1.0, 3, 3),
            Err(crate::Error::InvalidArgument(_))
        ));
        assert!(SpatialGrid::new(0.0, 0.0, 1.0, -1.0, 3, 3).is_err());
        assert!(SpatialGrid::new(0.0, 0.0, 1.0, 1.0, 1, 3).is_err());
        assert!(SpatialGrid::new(0.0, 0.0, 1.0, 1.0, 3, 1).is_err());
    }

    #[test]
    fn locate_clamps_to_last_cell() {
        let g = SpatialGrid::new(0.0, 0.0, 1.0, 1.0, 3, 3).unwrap();
        let c = g.locate(Vec2::new(2.0, 0.5)).unwrap();
        assert_eq!((c.i, c.j), (1, 0));
        assert_eq!((c.wx, c.wy), (1.0, 0.5));
        assert!(g.locate(Vec2::new(2.01, 0.5)).is_none());
        assert!(g.locate(Vec2::new(f64::NAN, 0.5)).is_none());
    }

    #[test]
    fn spanning_axis_hits_both_ends() {
        let ax = TimeAxis::spanning(0.0, 864_000.0, 3600.0).unwrap();
        assert_eq!(ax.nt, 241);
        assert_eq!(ax.t_end(), 864_000.0);
        let ax = TimeAxis::<f64>::spanning(10.0, 20.0, 3.0).unwrap();
        assert_eq!(ax.nt, 5);
        assert!((ax.t_end() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn single_slice_axis_is_an_instant() {
        let ax = TimeAxis::new(5.0, 1.0, 1).unwrap();
        assert!(ax.locate(5.0).is_some());
        assert!(ax.locate(5.5).is_none());
    }
}
