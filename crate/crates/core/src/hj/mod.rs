//! Backward solution of the running-reward Hamilton-Jacobi-Bellman equation.

mod hamiltonian;
mod reward;
mod solver;
mod stitch;
mod value;

pub use hamiltonian::{cfl_timestep, hamiltonian};
pub use reward::{GriddedReward, RunningReward};
pub use solver::solve_backward;
pub use stitch::{
    discount_envelope_check, solve_continuation, solve_with_continuation, stitch_long_horizon, terminal_from_coarse,
    zero_terminal, EnvelopeReport, StitchOptions,
};
pub use value::{sidecar_path, SolveConfig, SpatialScheme, TimeIntegrator, ValueFunction};
