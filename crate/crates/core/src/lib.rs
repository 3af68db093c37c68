//! Growth-optimal control of drifting seaweed farms.
//!
//! Log-mass maximization turns exponential seaweed growth into a running
//! reward, so the optimal value `J*(x, t)` solves a backward
//! Hamilton-Jacobi-Bellman equation on a space-time grid ([`hj`]). Its
//! gradient yields the feedback policy ([`policy`]), which [`sim`] runs in
//! closed loop against true currents with daily imperfect forecasts. Seeded
//! synthetic inputs come from [`scenarios`], batch metrics from [`eval`].
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, and the `*32` aliases fix `f32`.

mod error;
pub mod eval;
pub mod field;
pub mod growth;
pub mod hj;
pub mod policy;
mod scalar;
pub mod scenarios;
pub mod sim;
mod vec2;

pub use error::{Error, Result};
pub use scalar::Real;
pub use vec2::Vec2;

pub type Point = Vec2<f64>;
pub type SpatialGrid = field::SpatialGrid<f64>;
pub type TimeAxis = field::TimeAxis<f64>;
pub type FlowField = field::FlowField<f64>;
pub type ScalarField = field::ScalarField<f64>;
pub type GrowthModel = growth::GrowthModel<f64>;
pub type SolveConfig = hj::SolveConfig<f64>;
pub type ValueFunction = hj::ValueFunction<f64>;
pub type Control = policy::Control<f64>;
pub type Mission = sim::Mission<f64>;
pub type MissionResult = sim::MissionResult<f64>;
pub type Scenario = scenarios::Scenario<f64>;

pub type SpatialGrid32 = field::SpatialGrid<f32>;
pub type TimeAxis32 = field::TimeAxis<f32>;
pub type FlowField32 = field::FlowField<f32>;
pub type ScalarField32 = field::ScalarField<f32>;
pub type GrowthModel32 = growth::GrowthModel<f32>;
pub type SolveConfig32 = hj::SolveConfig<f32>;
pub type ValueFunction32 = hj::ValueFunction<f32>;
