use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scenarios::Scenario;
use crate::sim::{run_mission, write_results_jsonl, ControllerKind, ControllerSpec, MissionResult, Termination};
use crate::Real;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// `100·final_mass(result) / final_mass(baseline)` for the same mission.
pub fn relative_growth<T: Real>(result: &MissionResult<T>, baseline: &MissionResult<T>) -> Result<f64> {
    if result.mission_id != baseline.mission_id {
        return Err(invalid(format!(
            "relative growth across missions {} and {}",
            result.mission_id, baseline.mission_id
        )));
    }
    // The ratio first, so a baseline against itself is exactly 100.
    Ok(100.0 * (result.final_mass.as_f64() / baseline.final_mass.as_f64()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRow {
    pub mission_id: usize,
    pub controller: String,
    pub kind: ControllerKind,
    pub u_max: f64,
    pub final_mass: f64,
    pub termination: Termination,
    /// Percent of the baseline controller's final mass on this mission.
    pub relative_growth: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub controller: String,
    pub missions: usize,
    pub mean_final_mass: f64,
    /// Sample standard deviation; 0 for fewer than two missions.
    pub std_final_mass: f64,
    pub mean_relative_growth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub version: u32,
    pub baseline: String,
    pub controllers: Vec<String>,
    pub rows: Vec<BatchRow>,
    /// Missions every controller completed without leaving the domain.
    pub admissible: Vec<usize>,
    /// Aggregates over the admissible missions.
    pub intersection: Vec<Aggregate>,
    /// Aggregates over every mission.
    pub all_missions: Vec<Aggregate>,
}

impl BatchReport {
    fn aggregate(rows: &[BatchRow], controllers: &[String], keep: impl Fn(usize) -> bool) -> Vec<Aggregate> {
        controllers
            .iter()
            .map(|c| {
                let sel: Vec<&BatchRow> = rows.iter().filter(|r| &r.controller == c && keep(r.mission_id)).collect();
                let n = sel.len();
                let mean = |f: &dyn Fn(&BatchRow) -> f64| if n == 0 { f64::NAN } else { sel.iter().map(|r| f(r)).sum::<f64>() / n as f64 };
                let mean_mass = mean(&|r| r.final_mass);
                let std = if n < 2 {
                    0.0
                } else {
                    (sel.iter().map(|r| (r.final_mass - mean_mass).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
                };
                Aggregate {
                    controller: c.clone(),
                    missions: n,
                    mean_final_mass: mean_mass,
                    std_final_mass: std,
                    mean_relative_growth: mean(&|r| r.relative_growth),
                }
            })
            .collect()
    }

    /// Builds a report from rows; aggregates are derived, never stored separately.
    pub fn from_rows(rows: Vec<BatchRow>, controllers: Vec<String>, baseline: String) -> Self {
        let missions: BTreeSet<usize> = rows.iter().map(|r| r.mission_id).collect();
        let admissible: Vec<usize> = missions
            .into_iter()
            .filter(|&m| {
                controllers.iter().all(|c| {
                    rows.iter()
                        .any(|r| r.mission_id == m && &r.controller == c && r.termination == Termination::Completed)
                })
            })
            .collect();
        let intersection = Self::aggregate(&rows, &controllers, |m| admissible.binary_search(&m).is_ok());
        let all_missions = Self::aggregate(&rows, &controllers, |_| true);
        Self {
            version: REPORT_SCHEMA_VERSION,
            baseline,
            controllers,
            rows,
            admissible,
            intersection,
            all_missions,
        }
    }

    pub fn aggregate_for(&self, controller: &str, intersection: bool) -> Option<&Aggregate> {
        let list = if intersection { &self.intersection } else { &self.all_missions };
        list.iter().find(|a| a.controller == controller)
    }
}

fn failed_result<T: Real>(mission_id: usize, spec: &ControllerSpec, m0: T, u_max: T, msg: String) -> MissionResult<T> {
    MissionResult {
        mission_id,
        controller: spec.label(),
        kind: spec.kind,
        u_max,
        times: Vec::new(),
        positions: Vec::new(),
        controls: Vec::new(),
        mass_trace: Vec::new(),
        final_mass: m0,
        termination: Termination::Failed,
        failure: Some(msg),
        replan_log: Vec::new(),
    }
}

/// Runs every (mission, controller) pair on a pool of `jobs` workers and
/// returns the report together with the full mission results, both ordered
/// by mission then controller.
///
/// `baseline` names the controller label used for relative growth; by
/// default `floating` if present, else the first controller.
pub fn run_batch<T: Real>(
    scenario: &Scenario<T>,
    specs: &[ControllerSpec],
    mission_ids: Option<&[usize]>,
    jobs: usize,
    baseline: Option<&str>,
) -> Result<(BatchReport, Vec<MissionResult<T>>)> {
    if specs.is_empty() {
        return Err(invalid("no controllers given"));
    }
    for s in specs {
        s.validate()?;
    }
    let controllers: Vec<String> = specs.iter().map(ControllerSpec::label).collect();
    if controllers.iter().collect::<BTreeSet<_>>().len() != controllers.len() {
        return Err(invalid("controller labels must be unique"));
    }
    let baseline = match baseline {
        Some(b) if controllers.iter().any(|c| c == b) => b.to_string(),
        Some(b) => return Err(invalid(format!("baseline {b} is not among the controllers"))),
        None => controllers.iter().find(|c| *c == "floating").unwrap_or(&controllers[0]).clone(),
    };
    let missions = match mission_ids {
        Some(ids) => ids.iter().map(|&id| scenario.mission(id)).collect::<Result<Vec<_>>>()?,
        None => scenario.missions.iter().collect(),
    };

    let pairs: Vec<_> = missions.iter().flat_map(|m| specs.iter().map(move |s| (*m, s))).collect();
    let provider = scenario.provider();
    let opts = scenario.run_options();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| invalid(format!("worker pool: {e}")))?;
    let results: Vec<MissionResult<T>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(m, s)| {
                run_mission(m, s, &scenario.truth, &provider, &scenario.avg, &scenario.growth, &opts).unwrap_or_else(|e| {
                    let u_max = s.u_max.map_or(m.u_max, T::lit);
                    failed_result(m.id, s, m.m0, u_max, e.to_string())
                })
            })
            .collect()
    });

    let nspec = specs.len();
    let base_idx = controllers.iter().position(|c| *c == baseline).unwrap();
    let mut rows = Vec::with_capacity(results.len());
    for chunk in results.chunks(nspec) {
        let base = &chunk[base_idx];
        for r in chunk {
            rows.push(BatchRow {
                mission_id: r.mission_id,
                controller: r.controller.clone(),
                kind: r.kind,
                u_max: r.u_max.as_f64(),
                final_mass: r.final_mass.as_f64(),
                termination: r.termination,
                relative_growth: relative_growth(r, base)?,
                failure: r.failure.clone(),
            });
        }
    }
    Ok((BatchReport::from_rows(rows, controllers, baseline), results))
}

#[derive(Serialize)]
struct AggregateCsv<'a> {
    mode: &'a str,
    controller: &'a str,
    missions: usize,
    mean_final_mass: f64,
    std_final_mass: f64,
    mean_relative_growth: f64,
}

#[derive(Serialize)]
struct RowCsv<'a> {
    mission_id: usize,
    controller: &'a str,
    kind: &'a str,
    u_max: f64,
    final_mass: f64,
    termination: &'a str,
    relative_growth: f64,
    admissible: bool,
}

/// Writes `report.json`, `rows.csv`, `aggregates.csv` and, when given,
/// `results.jsonl` into `dir`.
pub fn write_report<T: Real>(dir: impl AsRef<Path>, report: &BatchReport, results: Option<&[MissionResult<T>]>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;

    let mut w = csv::Writer::from_path(dir.join("rows.csv"))?;
    for r in &report.rows {
        w.serialize(RowCsv {
            mission_id: r.mission_id,
            controller: &r.controller,
            kind: r.kind.as_str(),
            u_max: r.u_max,
            final_mass: r.final_mass,
            termination: match r.termination {
                Termination::Completed => "completed",
                Termination::ExitedDomain => "exited_domain",
                Termination::Failed => "failed",
            },
            relative_growth: r.relative_growth,
            admissible: report.admissible.binary_search(&r.mission_id).is_ok(),
        })?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("aggregates.csv"))?;
    for (mode, list) in [("intersection", &report.intersection), ("all_missions", &report.all_missions)] {
        for a in list {
            w.serialize(AggregateCsv {
                mode,
                controller: &a.controller,
                missions: a.missions,
                mean_final_mass: a.mean_final_mass,
                std_final_mass: a.std_final_mass,
                mean_relative_growth: a.mean_relative_growth,
            })?;
        }
    }
    w.flush()?;

    if let Some(results) = results {
        write_results_jsonl(fs::File::create(dir.join("results.jsonl"))?, results)?;
    }
    Ok(())
}
