//! Space-time grids, gridded scalar and vector fields, interpolation and
//! the on-disk field format.

mod fields;
mod grid;
pub mod io;

pub use fields::{FlowField, ScalarField};
pub(crate) use fields::locate_both;
pub use grid::{SpatialGrid, TimeAxis};
pub use io::{read_field, read_flow, read_scalar, write_field, write_flow, write_scalar, AnyField};

/// Convenience constructor mirroring [`SpatialGrid::new`].
pub fn build_grid<T: crate::Real>(x0: T, y0: T, dx: T, dy: T, nx: usize, ny: usize) -> crate::Result<SpatialGrid<T>> {
    SpatialGrid::new(x0, y0, dx, dy, nx, ny)
}
