//! Closed-loop mission simulation.

mod controller;
mod forecast;
mod mission;
mod vessel;

pub use controller::{ControllerKind, ControllerSpec};
pub use forecast::ForecastProvider;
pub use mission::{run_mission, write_results_jsonl, write_trajectory_csv, Mission, MissionResult, RunOptions, Termination};
pub use vessel::step_vessel;
