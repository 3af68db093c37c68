use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::controller::{ControllerKind, ControllerSpec};
use super::forecast::ForecastProvider;
use super::vessel::step_vessel;
use crate::error::{invalid, Error, Result};
use crate::field::{FlowField, TimeAxis};
use crate::growth::GrowthModel;
use crate::hj::{solve_backward, solve_continuation, terminal_from_coarse, zero_terminal, SolveConfig, SpatialScheme, StitchOptions, TimeIntegrator, ValueFunction};
use crate::policy::{feedback_control, field_gradient, Control};
use crate::scenarios::extend_average;
use crate::{Real, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mission<T> {
    pub id: usize,
    pub x0: Vec2<T>,
    pub t0: T,
    pub horizon: T,
    /// Initial seaweed mass (kg).
    pub m0: T,
    /// Actuation bound (u/s).
    pub u_max: T,
}

impl<T: Real> Mission<T> {
    /// 100 kg start mass, `u_max` 0.1.
    pub fn new(id: usize, x0: Vec2<T>, t0: T, horizon: T) -> Self {
        Self {
            id,
            x0,
            t0,
            horizon,
            m0: T::lit(100.0),
            u_max: T::lit(0.1),
        }
    }

    pub fn t_end(&self) -> T {
        self.t0 + self.horizon
    }

    pub fn validate(&self, truth: &FlowField<T>) -> Result<()> {
        if !(self.horizon > T::zero()) || !(self.m0 > T::zero()) || !(self.u_max >= T::zero()) {
            return Err(invalid(format!("mission {}: needs horizon > 0, m0 > 0, u_max >= 0", self.id)));
        }
        if !truth.grid.contains(self.x0) || !truth.time.contains(self.t0) || !truth.time.contains(self.t_end()) {
            return Err(invalid(format!("mission {} lies outside the truth field", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    ExitedDomain,
    /// Replanning failed; the trajectory stops at the failure time.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionResult<T> {
    pub mission_id: usize,
    pub controller: String,
    pub kind: ControllerKind,
    pub u_max: T,
    pub times: Vec<T>,
    pub positions: Vec<Vec2<T>>,
    /// Control held over `[times[k], times[k+1]]`.
    pub controls: Vec<Control<T>>,
    pub mass_trace: Vec<T>,
    pub final_mass: T,
    pub termination: Termination,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Instants at which a value function was computed.
    pub replan_log: Vec<T>,
}

impl<T: Real> MissionResult<T> {
    pub fn trajectory(&self) -> Vec<(T, Vec2<T>)> {
        self.times.iter().copied().zip(self.positions.iter().copied()).collect()
    }

    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }
}

/// Look-ahead of the growth-ascent controller (s). Its heading follows
/// `∇(γ·lookahead)`, the gradient of the growth exponent over that hour.
const GREEDY_LOOKAHEAD: f64 = 3600.0;

enum Policy<T> {
    Idle,
    Ascent,
    Value(ValueFunction<T>),
}

struct Planner<'a, T> {
    spec: &'a ControllerSpec,
    truth: &'a FlowField<T>,
    provider: &'a ForecastProvider<'a, T>,
    growth: &'a GrowthModel<T>,
    config: SolveConfig<T>,
    opts: StitchOptions<T>,
    end: T,
    t_ext: T,
    continuation: Option<ValueFunction<T>>,
}

impl<T: Real> Planner<'_, T> {
    fn hourly(&self, a: T, b: T) -> Result<TimeAxis<T>> {
        TimeAxis::spanning(a, b, self.opts.output_dt)
    }

    fn plan(&self, t: T) -> Result<ValueFunction<T>> {
        let tol = self.truth.time.tol();
        match self.spec.kind {
            ControllerKind::Oracle => {
                let grid = self.truth.grid;
                solve_backward(self.truth, self.growth, &zero_terminal(&grid, self.t_ext)?, t, self.t_ext, &self.config, &self.hourly(t, self.t_ext)?)
            }
            ControllerKind::Greedy5d => {
                let look = self.spec.planning_horizon.map_or(self.provider.forecast_length, T::lit);
                let t_until = (t + look).min(self.end);
                let fc = self.provider.issue_until(t, t_until)?;
                solve_backward(&fc, self.growth, &zero_terminal(&fc.grid, t_until)?, t, t_until, &self.config, &self.hourly(t, t_until)?)
            }
            ControllerKind::Longterm | ControllerKind::LongtermDiscounted => {
                let t_fc = (t + self.provider.forecast_length).min(self.t_ext);
                let fc = self.provider.issue_until(t, t_fc)?;
                let terminal = match &self.continuation {
                    Some(c) if t_fc < self.t_ext - tol => terminal_from_coarse(c, &fc.grid, t_fc)?,
                    _ => zero_terminal(&fc.grid, t_fc)?,
                };
                let cfg = self.opts.stage_config(&self.config, false);
                solve_backward(&fc, self.growth, &terminal, t, t_fc, &cfg, &self.hourly(t, t_fc)?)
            }
            ControllerKind::Floating | ControllerKind::Greedy1h => unreachable!("no value function for {}", self.spec.kind),
        }
    }
}

fn into_exit<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::OutOfDomain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Simulation step and solver knobs shared by every replan of a mission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions<T> {
    /// Control hold and integration step (s).
    pub sim_step: T,
    pub cfl: T,
    pub scheme: SpatialScheme,
    pub integrator: TimeIntegrator,
}

impl<T: Real> RunOptions<T> {
    pub fn new(sim_step: T) -> Self {
        Self {
            sim_step,
            cfl: T::lit(0.5),
            scheme: SpatialScheme::Upwind1,
            integrator: TimeIntegrator::Euler,
        }
    }

    pub fn with_scheme(mut self, scheme: SpatialScheme, integrator: TimeIntegrator) -> Self {
        self.scheme = scheme;
        self.integrator = integrator;
        self
    }
}

/// Closed-loop mission: replan on every forecast refresh, apply the feedback
/// control every `sim_step`, and integrate position and mass under `truth`.
///
/// The long-term controllers reuse one coarse continuation, solved on `avg`
/// (held constant beyond its stamped instants) from the first forecast end to
/// the end of the planning horizon.
pub fn run_mission<T: Real>(
    mission: &Mission<T>,
    spec: &ControllerSpec,
    truth: &FlowField<T>,
    provider: &ForecastProvider<'_, T>,
    avg: &FlowField<T>,
    growth: &GrowthModel<T>,
    opts: &RunOptions<T>,
) -> Result<MissionResult<T>> {
    let sim_step = opts.sim_step;
    spec.validate()?;
    mission.validate(truth)?;
    provider.validate()?;
    if !(sim_step > T::zero()) {
        return Err(invalid("sim_step must be > 0"));
    }
    let u_max = spec.u_max.map_or(mission.u_max, T::lit);
    let (t0, end) = (mission.t0, mission.t_end());
    let tol = T::snap_tol() * (end.abs() + sim_step);

    let t_ext = match spec.kind {
        ControllerKind::Oracle | ControllerKind::Longterm | ControllerKind::LongtermDiscounted => {
            let ph = spec.planning_horizon.map_or(mission.horizon, T::lit);
            if ph < mission.horizon - tol {
                return Err(invalid(format!("{}: planning_horizon shorter than the mission", spec.label())));
            }
            t0 + ph
        }
        _ => end,
    };
    if spec.kind == ControllerKind::Greedy5d && matches!(spec.planning_horizon, Some(h) if T::lit(h) > provider.forecast_length + tol) {
        return Err(invalid(format!("{}: planning_horizon exceeds the forecast length", spec.label())));
    }

    let config = SolveConfig::new(u_max)
        .with_tau(spec.tau.map(T::lit))
        .with_cfl(opts.cfl)
        .with_scheme(opts.scheme)
        .with_integrator(opts.integrator);
    let mut result = MissionResult {
        mission_id: mission.id,
        controller: spec.label(),
        kind: spec.kind,
        u_max,
        times: vec![t0],
        positions: vec![mission.x0],
        controls: Vec::new(),
        mass_trace: vec![mission.m0],
        final_mass: mission.m0,
        termination: Termination::Completed,
        failure: None,
        replan_log: Vec::new(),
    };

    let mut planner = Planner {
        spec,
        truth,
        provider,
        growth,
        config,
        opts: StitchOptions::default(),
        end,
        t_ext,
        continuation: None,
    };

    let is_longterm = matches!(spec.kind, ControllerKind::Longterm | ControllerKind::LongtermDiscounted);
    if is_longterm {
        let t_fc0 = (t0 + provider.forecast_length).min(t_ext);
        if t_fc0 < t_ext - tol {
            if !avg.grid.contains_box(&truth.grid) {
                return Err(invalid("truth grid is not contained in the average-currents grid"));
            }
            let avg_ext = extend_average(avg, t_fc0, t_ext, T::lit(3.0 * 3600.0))?;
            match solve_continuation(&avg_ext, growth, t_fc0, t_ext, &config, &planner.opts) {
                Ok(c) => planner.continuation = Some(c),
                Err(e @ Error::SolverDiverged { .. }) => {
                    result.termination = Termination::Failed;
                    result.failure = Some(e.to_string());
                    return Ok(result);
                }
                Err(e) => return Err(e),
            }
        }
    }

    let mut policy = match spec.kind {
        ControllerKind::Floating => Policy::Idle,
        ControllerKind::Greedy1h => Policy::Ascent,
        _ => Policy::Idle,
    };
    let refresh = match spec.kind {
        ControllerKind::Greedy5d | ControllerKind::Longterm | ControllerKind::LongtermDiscounted => Some(provider.refresh_interval),
        _ => None,
    };
    let mut next_plan = if spec.kind.solves() { Some(t0) } else { None };

    let (mut t, mut x, mut m) = (t0, mission.x0, mission.m0);
    while t < end - tol {
        if let Some(tp) = next_plan.filter(|&tp| t >= tp - tol) {
            match planner.plan(t) {
                Ok(vf) => policy = Policy::Value(vf),
                Err(e @ Error::SolverDiverged { .. }) => {
                    result.termination = Termination::Failed;
                    result.failure = Some(e.to_string());
                    break;
                }
                Err(e) => return Err(e),
            }
            result.replan_log.push(t);
            next_plan = refresh.map(|r| tp + r);
        }

        let mut dt = sim_step.min(end - t);
        if let Some(tp) = next_plan {
            if tp - t > tol {
                dt = dt.min(tp - t);
            }
        }

        let u = match &policy {
            Policy::Idle => Some(Control::zero()),
            Policy::Ascent => into_exit(field_gradient(&growth.gross, x, t))?.map(|g| Control::along(g * T::lit(GREEDY_LOOKAHEAD), u_max)),
            Policy::Value(vf) => into_exit(feedback_control(vf, x, t, u_max))?,
        };
        let Some(u) = u else {
            result.termination = Termination::ExitedDomain;
            break;
        };
        let Some(next) = step_vessel(x, u, t, dt, truth)? else {
            result.termination = Termination::ExitedDomain;
            break;
        };
        let t_next = if end - (t + dt) <= tol { end } else { t + dt };
        let Some(log_g) = into_exit(growth.log_growth((t, x), (t_next, next)))? else {
            result.termination = Termination::ExitedDomain;
            break;
        };
        m = m * log_g.exp();
        t = t_next;
        x = next;
        result.controls.push(u);
        result.times.push(t);
        result.positions.push(x);
        result.mass_trace.push(m);
    }
    result.final_mass = m;
    Ok(result)
}

/// One JSON document per line.
pub fn write_results_jsonl<T: Real, W: Write>(mut out: W, results: &[MissionResult<T>]) -> Result<()> {
    for r in results {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryRow<T> {
    t: T,
    x: T,
    y: T,
    ux: Option<T>,
    uy: Option<T>,
    mass: T,
}

/// Per-step dump with columns `t,x,y,ux,uy,mass`; the last row has no control.
pub fn write_trajectory_csv<T: Real>(path: impl AsRef<Path>, result: &MissionResult<T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (k, (&t, p)) in result.times.iter().zip(&result.positions).enumerate() {
        let u = result.controls.get(k);
        w.serialize(TrajectoryRow {
            t,
            x: p.x,
            y: p.y,
            ux: u.map(|u| u.ux),
            uy: u.map(|u| u.uy),
            mass: result.mass_trace[k],
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{ScalarField, SpatialGrid};
    use crate::growth::{integrate_mass, SECONDS_PER_DAY};
    use crate::scenarios::ErrorModel;

    const DAY: f64 = SECONDS_PER_DAY;

    fn setup(vel: Vec2<f64>, days: f64) -> (FlowField<f64>, GrowthModel<f64>) {
        let g = SpatialGrid::spanning(0.0, 0.0, 100_000.0, 100_000.0, 21, 21).unwrap();
        let time = TimeAxis::new(0.0, DAY, days as usize + 1).unwrap();
        let truth = FlowField::constant(g, time, vel).unwrap();
        let gross = ScalarField::from_fn(g, time, |p, _| 2e-6 * (1.0 + p.x / 100_000.0)).unwrap();
        (truth, GrowthModel::new(gross, 1e-7, None).unwrap())
    }

    #[test]
    fn floating_in_still_water_grows_in_place() {
        let (truth, growth) = setup(Vec2::zero(), 4.0);
        let provider = ForecastProvider::new(&truth, ErrorModel::default(), 0);
        let mission = Mission::new(0, Vec2::new(30_000.0, 50_000.0), 0.0, 3.0 * DAY);
        let r = run_mission(&mission, &ControllerSpec::floating(), &truth, &provider, &truth, &growth, &RunOptions::new(600.0)).unwrap();
        assert!(r.completed());
        assert!(r.positions.iter().all(|&p| p == mission.x0));
        let gamma = growth.growth_factor(mission.x0, 0.0).unwrap();
        let want = 100.0 * (gamma * 3.0 * DAY).exp();
        assert!((r.final_mass - want).abs() / want < 1e-12);
        assert!(r.replan_log.is_empty());
        assert_eq!(r.times.len(), 3 * 144 + 1);
    }

    #[test]
    fn mass_trace_matches_trajectory_integration() {
        let (truth, growth) = setup(Vec2::new(0.05, 0.02), 4.0);
        let provider = ForecastProvider::new(&truth, ErrorModel::default(), 0);
        let mission = Mission::new(1, Vec2::new(20_000.0, 20_000.0), 0.0, 3.0 * DAY);
        for spec in [ControllerSpec::greedy_1h(), ControllerSpec::oracle(), ControllerSpec::greedy_5d()] {
            let r = run_mission(&mission, &spec, &truth, &provider, &truth, &growth, &RunOptions::new(600.0)).unwrap();
            let m = integrate_mass(&growth, &r.trajectory(), mission.m0).unwrap();
            assert_eq!(m, r.mass_trace);
            assert!(r.mass_trace.iter().all(|&m| m > 0.0));
        }
    }

    #[test]
    fn domain_exit_freezes_mission() {
        let (truth, growth) = setup(Vec2::new(0.5, 0.0), 4.0);
        let provider = ForecastProvider::new(&truth, ErrorModel::default(), 0);
        let mission = Mission::new(2, Vec2::new(80_000.0, 50_000.0), 0.0, 2.0 * DAY);
        let r = run_mission(&mission, &ControllerSpec::floating(), &truth, &provider, &truth, &growth, &RunOptions::new(600.0)).unwrap();
        assert_eq!(r.termination, Termination::ExitedDomain);
        assert!(truth.grid.contains(*r.positions.last().unwrap()));
        assert_eq!(r.final_mass, *r.mass_trace.last().unwrap());
        assert!(*r.times.last().unwrap() < mission.t_end());
    }

    #[test]
    fn replans_follow_refresh_cadence() {
        let (truth, growth) = setup(Vec2::zero(), 8.0);
        let provider = ForecastProvider::new(&truth, ErrorModel::default(), 0);
        let mission = Mission::new(3, Vec2::new(20_000.0, 50_000.0), 0.0, 3.0 * DAY);
        let r = run_mission(&mission, &ControllerSpec::greedy_5d(), &truth, &provider, &truth, &growth, &RunOptions::new(600.0)).unwrap();
        assert_eq!(r.replan_log, vec![0.0, DAY, 2.0 * DAY]);
        // Heading up the growth gradient at full thrust.
        let end = r.positions.last().unwrap();
        assert!(end.x > 20_000.0 + 0.09 * 3.0 * DAY * 0.9);
        assert!(r.controls.iter().all(|u| u.magnitude() <= 0.1 + 1e-12));
    }

    #[test]
    fn longterm_uses_continuation() {
        let (truth, growth) = setup(Vec2::zero(), 8.0);
        let provider = ForecastProvider::new(&truth, ErrorModel::default(), 0).with_length(DAY);
        let mission = Mission::new(4, Vec2::new(20_000.0, 50_000.0), 0.0, 3.0 * DAY);
        let avg = truth.resample(&SpatialGrid::spanning(0.0, 0.0, 100_000.0, 100_000.0, 11, 11).unwrap(), &truth.time).unwrap();
        let r = run_mission(&mission, &ControllerSpec::longterm(), &truth, &provider, &avg, &growth, &RunOptions::new(600.0)).unwrap();
        assert!(r.completed());
        assert_eq!(r.replan_log.len(), 3);
        assert!(r.positions.last().unwrap().x > 40_000.0);
    }

    #[test]
    fn missions_are_deterministic() {
        let (truth, growth) = setup(Vec2::new(0.01, -0.01), 8.0);
        let em = ErrorModel {
            sigma0: 0.05,
            growth_per_day: 0.2,
            corr_len: 20_000.0,
            corr_time: Some(DAY),
            features: 32,
        };
        let provider = ForecastProvider::new(&truth, em, 11);
        let mission = Mission::new(5, Vec2::new(50_000.0, 50_000.0), 0.0, 2.0 * DAY);
        let a = run_mission(&mission, &ControllerSpec::greedy_5d(), &truth, &provider, &truth, &growth, &RunOptions::new(900.0)).unwrap();
        let b = run_mission(&mission, &ControllerSpec::greedy_5d(), &truth, &provider, &truth, &growth, &RunOptions::new(900.0)).unwrap();
        let mut ja = Vec::new();
        let mut jb = Vec::new();
        write_results_jsonl(&mut ja, &[a]).unwrap();
        write_results_jsonl(&mut jb, &[b]).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn trajectory_csv_layout() {
        let (truth, growth) = setup(Vec2::zero(), 2.0);
        let provider = ForecastProvider::new(&truth, ErrorModel::default(), 0);
        let mission = Mission::new(6, Vec2::new(50_000.0, 50_000.0), 0.0, 3600.0);
        let r = run_mission(&mission, &ControllerSpec::floating(), &truth, &provider, &truth, &growth, &RunOptions::new(1800.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        write_trajectory_csv(&path, &r).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,x,y,ux,uy,mass");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].contains(",,"));
    }

    #[test]
    fn mission_outside_truth_rejected() {
        let (truth, growth) = setup(Vec2::zero(), 2.0);
        let provider = ForecastProvider::new(&truth, ErrorModel::default(), 0);
        let mission = Mission::new(7, Vec2::new(50_000.0, 50_000.0), 0.0, 5.0 * DAY);
        assert!(run_mission(&mission, &ControllerSpec::floating(), &truth, &provider, &truth, &growth, &RunOptions::new(600.0)).is_err());
    }
}
