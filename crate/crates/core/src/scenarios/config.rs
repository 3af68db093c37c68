use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::average::{bias_average, monthly_average};
use super::blobs::{gross_field, Blob};
use super::error::ErrorModel;
use super::flows::FlowSpec;
use super::missions::{sample_missions, MissionSampling};
use crate::error::{invalid, Result};
use crate::field::{read_flow, read_scalar, write_flow, write_scalar, FlowField, SpatialGrid, TimeAxis};
use crate::growth::{GrowthModel, LightCycle, SECONDS_PER_DAY};
use crate::hj::{SpatialScheme, TimeIntegrator};
use crate::sim::{ForecastProvider, Mission, RunOptions};
use crate::{Real, Vec2};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpan {
    pub t0: f64,
    pub t1: f64,
    /// Truth slice spacing (s).
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobConfig {
    pub center: Vec2<f64>,
    pub radius: f64,
    pub peak_per_day: f64,
    /// Center velocity (u/s).
    #[serde(default)]
    pub drift: Vec2<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub blobs: Vec<BlobConfig>,
    #[serde(default)]
    pub background_per_day: f64,
    #[serde(default)]
    pub resp_per_day: f64,
    /// Lit fraction of each day; absent keeps the light on.
    #[serde(default)]
    pub light_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageConfig {
    /// Block length of the average currents (s).
    pub window: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub rotate_deg: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastConfig {
    #[serde(default = "default_refresh")]
    pub refresh: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    pub error: ErrorModel,
}

fn default_refresh() -> f64 {
    SECONDS_PER_DAY
}

fn default_length() -> f64 {
    5.0 * SECONDS_PER_DAY
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissionConfig {
    pub n: usize,
    pub min_border_dist: f64,
    pub horizon: f64,
    #[serde(default = "default_m0")]
    pub m0: f64,
    #[serde(default = "default_u_max")]
    pub u_max: f64,
    /// Latest start time; defaults to the last start that still fits the horizon.
    #[serde(default)]
    pub start_latest: Option<f64>,
}

fn default_m0() -> f64 {
    100.0
}

fn default_u_max() -> f64 {
    0.1
}

fn default_sim_step() -> f64 {
    600.0
}

/// Everything needed to regenerate a scenario bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub domain: DomainBox,
    pub fine: Resolution,
    pub coarse: Resolution,
    pub time: TimeSpan,
    pub flow: FlowSpec,
    pub growth: GrowthConfig,
    pub average: AverageConfig,
    pub forecast: ForecastConfig,
    pub missions: MissionConfig,
    #[serde(default = "default_sim_step")]
    pub sim_step: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    pub seed: u64,
}

/// Numerical scheme used by every value-function solve in the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub scheme: SpatialScheme,
    #[serde(default)]
    pub integrator: TimeIntegrator,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: default_cfl(),
            scheme: SpatialScheme::default(),
            integrator: TimeIntegrator::default(),
        }
    }
}

fn default_cfl() -> f64 {
    0.5
}

fn schema_version() -> u32 {
    SCENARIO_SCHEMA_VERSION
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn fine_grid<T: Real>(&self) -> Result<SpatialGrid<T>> {
        let d = &self.domain;
        SpatialGrid::spanning(T::lit(d.x0), T::lit(d.y0), T::lit(d.x1), T::lit(d.y1), self.fine.nx, self.fine.ny)
    }

    pub fn coarse_grid<T: Real>(&self) -> Result<SpatialGrid<T>> {
        let d = &self.domain;
        SpatialGrid::spanning(T::lit(d.x0), T::lit(d.y0), T::lit(d.x1), T::lit(d.y1), self.coarse.nx, self.coarse.ny)
    }

    pub fn time_axis<T: Real>(&self) -> Result<TimeAxis<T>> {
        TimeAxis::spanning(T::lit(self.time.t0), T::lit(self.time.t1), T::lit(self.time.dt))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCENARIO_SCHEMA_VERSION {
            return Err(invalid(format!("unsupported scenario version {}", self.version)));
        }
        let fine = self.fine_grid::<f64>()?;
        let coarse = self.coarse_grid::<f64>()?;
        if coarse.dx < fine.dx || coarse.dy < fine.dy {
            return Err(invalid("coarse spacing must not be finer than the fine spacing"));
        }
        if !(self.time.t1 > self.time.t0) || !(self.time.dt > 0.0) {
            return Err(invalid("time span must be non-empty with dt > 0"));
        }
        let g = &self.growth;
        if !(g.resp_per_day >= 0.0) || !(g.background_per_day >= 0.0) {
            return Err(invalid("respiration and background rates must be >= 0"));
        }
        if g.blobs.iter().any(|b| !(b.peak_per_day >= 0.0) || !(b.radius > 0.0)) {
            return Err(invalid("blob peaks must be >= 0 and radii > 0"));
        }
        if let Some(f) = g.light_fraction {
            LightCycle::new(SECONDS_PER_DAY, f)?;
        }
        self.forecast.error.validate()?;
        if !(self.forecast.refresh > 0.0) || !(self.forecast.length > 0.0) {
            return Err(invalid("forecast refresh and length must be > 0"));
        }
        if !(self.average.window > 0.0) || self.average.window > self.time.t1 - self.time.t0 {
            return Err(invalid("average window must be in (0, time span]"));
        }
        let m = &self.missions;
        if !(m.horizon > 0.0) || m.horizon > self.time.t1 - self.time.t0 {
            return Err(invalid("mission horizon must fit the time span"));
        }
        if !(m.m0 > 0.0) || !(m.u_max >= 0.0) {
            return Err(invalid("missions need m0 > 0 and u_max >= 0"));
        }
        if !(self.sim_step > 0.0) {
            return Err(invalid("sim_step must be > 0"));
        }
        if !(self.solver.cfl > 0.0 && self.solver.cfl <= 1.0) {
            return Err(invalid(format!("solver.cfl must be in (0, 1], got {}", self.solver.cfl)));
        }
        Ok(())
    }

    fn blobs(&self) -> Vec<Blob> {
        self.growth
            .blobs
            .iter()
            .map(|b| Blob {
                center: b.center,
                radius: b.radius,
                peak: b.peak_per_day / SECONDS_PER_DAY,
                drift: b.drift,
            })
            .collect()
    }

    fn growth_model<T: Real>(&self, gross: crate::field::ScalarField<T>) -> Result<GrowthModel<T>> {
        let light = match self.growth.light_fraction {
            Some(f) => Some(LightCycle::new(T::lit(SECONDS_PER_DAY), T::lit(f))?),
            None => None,
        };
        GrowthModel::new(gross, T::lit(self.growth.resp_per_day / SECONDS_PER_DAY), light)
    }
}

/// Materialized scenario: truth currents, block-averaged currents on the
/// coarse grid, growth model and mission list.
#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub config: ScenarioConfig,
    pub truth: FlowField<T>,
    pub avg: FlowField<T>,
    pub growth: GrowthModel<T>,
    pub missions: Vec<Mission<T>>,
}

const CONFIG_FILE: &str = "scenario.json";
const TRUTH_FILE: &str = "truth.field";
const AVG_FILE: &str = "avg.field";
const GROWTH_FILE: &str = "growth.field";
const MISSIONS_FILE: &str = "missions.json";

impl<T: Real> Scenario<T> {
    pub fn generate(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let fine = config.fine_grid()?;
        let time = config.time_axis()?;
        let truth = config.flow.build(fine, time)?;

        let av = &config.average;
        let avg = monthly_average(&truth, T::lit(av.window), &config.coarse_grid()?)?;
        let avg = if av.scale != 1.0 || av.rotate_deg != 0.0 {
            bias_average(&avg, T::lit(av.scale), T::lit(av.rotate_deg))?
        } else {
            avg
        };

        let blobs = config.blobs();
        let growth_time = if blobs.iter().any(|b| b.drift != Vec2::zero()) {
            time
        } else {
            TimeAxis::new(time.t0, time.t_end() - time.t0, 2)?
        };
        let gross = gross_field(&blobs, config.growth.background_per_day / SECONDS_PER_DAY, fine, growth_time)?;
        let growth = config.growth_model(gross)?;

        let m = &config.missions;
        let horizon = T::lit(m.horizon);
        let latest = m.start_latest.map_or(time.t_end() - horizon, T::lit).min(time.t_end() - horizon);
        let sampling = MissionSampling {
            t_earliest: time.t0,
            t_latest: latest,
            horizon,
            m0: T::lit(m.m0),
            u_max: T::lit(m.u_max),
        };
        let missions = sample_missions(&fine, m.n, T::lit(m.min_border_dist), config.seed, &sampling)?;
        Ok(Self {
            config: config.clone(),
            truth,
            avg,
            growth,
            missions,
        })
    }

    /// Forecast source seeded from the scenario seed.
    pub fn provider(&self) -> ForecastProvider<'_, T> {
        let f = &self.config.forecast;
        ForecastProvider::new(&self.truth, f.error, self.config.seed)
            .with_refresh(T::lit(f.refresh))
            .with_length(T::lit(f.length))
    }

    pub fn sim_step(&self) -> T {
        T::lit(self.config.sim_step)
    }

    pub fn run_options(&self) -> RunOptions<T> {
        let s = &self.config.solver;
        RunOptions {
            sim_step: self.sim_step(),
            cfl: T::lit(s.cfl),
            scheme: s.scheme,
            integrator: s.integrator,
        }
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join(CONFIG_FILE), serde_json::to_string_pretty(&self.config)? + "\n")?;
        write_flow(&self.truth, dir.join(TRUTH_FILE))?;
        write_flow(&self.avg, dir.join(AVG_FILE))?;
        write_scalar(&self.growth.gross, dir.join(GROWTH_FILE))?;
        fs::write(dir.join(MISSIONS_FILE), serde_json::to_string_pretty(&self.missions)? + "\n")?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let config = ScenarioConfig::from_json(&fs::read_to_string(dir.join(CONFIG_FILE))?)?;
        let truth = read_flow(dir.join(TRUTH_FILE))?;
        let avg = read_flow(dir.join(AVG_FILE))?;
        let growth = config.growth_model(read_scalar(dir.join(GROWTH_FILE))?)?;
        let missions: Vec<Mission<T>> = serde_json::from_str(&fs::read_to_string(dir.join(MISSIONS_FILE))?)?;
        for m in &missions {
            m.validate(&truth)?;
        }
        Ok(Self {
            config,
            truth,
            avg,
            growth,
            missions,
        })
    }

    pub fn mission(&self, id: usize) -> Result<&Mission<T>> {
        self.missions
            .iter()
            .find(|m| m.id == id)
            .ok_or_else(|| invalid(format!("no mission with id {id}")))
    }
}

/// Desk-scale double-gyre scenario used by the examples and tests: a
/// 200 km × 100 km basin, two growth hotspots and a calibrated forecast error.
pub fn desk_config(seed: u64, n_missions: usize) -> ScenarioConfig {
    let day = SECONDS_PER_DAY;
    ScenarioConfig {
        version: SCENARIO_SCHEMA_VERSION,
        domain: DomainBox {
            x0: 0.0,
            y0: 0.0,
            x1: 200_000.0,
            y1: 100_000.0,
        },
        fine: Resolution { nx: 41, ny: 21 },
        coarse: Resolution { nx: 21, ny: 11 },
        time: TimeSpan {
            t0: 0.0,
            t1: 20.0 * day,
            dt: 3.0 * 3600.0,
        },
        flow: FlowSpec::DoubleGyre {
            a: 0.1,
            eps: 0.25,
            period: 10.0 * day,
        },
        growth: GrowthConfig {
            blobs: vec![
                BlobConfig {
                    center: Vec2::new(60_000.0, 65_000.0),
                    radius: 20_000.0,
                    peak_per_day: 0.3,
                    drift: Vec2::zero(),
                },
                BlobConfig {
                    center: Vec2::new(150_000.0, 35_000.0),
                    radius: 25_000.0,
                    peak_per_day: 0.25,
                    drift: Vec2::zero(),
                },
            ],
            background_per_day: 0.12,
            resp_per_day: 0.05,
            light_fraction: Some(0.5),
        },
        average: AverageConfig {
            window: 20.0 * day,
            scale: 1.0,
            rotate_deg: 0.0,
        },
        forecast: ForecastConfig {
            refresh: day,
            length: 5.0 * day,
            error: ErrorModel {
                sigma0: 0.05,
                growth_per_day: 0.2,
                corr_len: 30_000.0,
                corr_time: Some(2.0 * day),
                features: 64,
            },
        },
        missions: MissionConfig {
            n: n_missions,
            min_border_dist: 15_000.0,
            horizon: 10.0 * day,
            m0: 100.0,
            u_max: 0.1,
            start_latest: None,
        },
        sim_step: 600.0,
        solver: SolverConfig::default(),
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_config_is_valid_and_underactuated() {
        let c = desk_config(1, 4);
        c.validate().unwrap();
        let s = Scenario::<f64>::generate(&c).unwrap();
        assert!(s.truth.max_speed() >= 3.0 * c.missions.u_max);
        assert_eq!(s.missions.len(), 4);
        assert_eq!(s.avg.time.nt, 1);
        assert!(s.missions.iter().all(|m| m.t_end() <= s.truth.time.t_end()));
    }

    #[test]
    fn generation_is_reproducible() {
        let c = desk_config(5, 3);
        let a = Scenario::<f64>::generate(&c).unwrap();
        let b = Scenario::<f64>::generate(&c).unwrap();
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.avg, b.avg);
        assert_eq!(a.growth.gross, b.growth.gross);
        assert_eq!(a.missions, b.missions);
    }

    #[test]
    fn save_load_round_trip() {
        let c = desk_config(2, 3);
        let s = Scenario::<f64>::generate(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        s.save(dir.path()).unwrap();
        let back = Scenario::<f64>::load(dir.path()).unwrap();
        assert_eq!(back.config, c);
        assert_eq!(back.missions, s.missions);
        // The file payload is f32.
        let d = back.truth.u_data().iter().zip(s.truth.u_data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-7);
        assert!(back.mission(2).is_ok() && back.mission(3).is_err());
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let c = desk_config(3, 2);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ScenarioConfig::from_json(&text).unwrap(), c);
        let mut bad = c.clone();
        bad.coarse = Resolution { nx: 81, ny: 41 };
        assert!(bad.validate().is_err());
        let mut bad = c.clone();
        bad.forecast.error.sigma0 = -1.0;
        assert!(bad.validate().is_err());
        assert!(ScenarioConfig::from_json("{\"domain\": 3}").is_err());
    }
}
