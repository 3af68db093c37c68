//! Seeded synthetic scenarios: analytic currents, growth hotspots, forecast
//! errors, block-averaged currents and mission sets.

mod average;
mod blobs;
mod config;
mod error;
mod flows;
mod missions;

pub use average::{bias_average, extend_average, monthly_average};
pub use blobs::{gross_field, growth_blobs, Blob};
pub use config::{
    desk_config, AverageConfig, BlobConfig, DomainBox, ForecastConfig, GrowthConfig, MissionConfig, Resolution, Scenario, ScenarioConfig, SolverConfig,
    TimeSpan, SCENARIO_SCHEMA_VERSION,
};
pub use error::{make_error_field, slice_rmse, ErrorModel};
pub use flows::{double_gyre, highway, uniform, FlowSpec};
pub use missions::{sample_missions, MissionSampling};
