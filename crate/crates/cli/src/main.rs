//! `floatfarm` command-line front end.
//!
//! Every command exits 0 on success. Failures print a single JSON line
//! `{"error": <kind>, "message": <text>}` on stderr and exit 1 (runtime) or
//! 2 (usage).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use floatfarm::eval::{compare, run_batch, write_compare_csv, write_report, BatchReport};
use floatfarm::field::{read_flow, read_scalar, ScalarField, TimeAxis};
use floatfarm::growth::{GrowthModel, LightCycle, SECONDS_PER_DAY};
use floatfarm::hj::{solve_backward, zero_terminal, SolveConfig, SpatialScheme, TimeIntegrator};
use floatfarm::scenarios::{desk_config, Scenario, ScenarioConfig};
use floatfarm::sim::{run_mission, write_trajectory_csv, ControllerSpec};

#[derive(Parser)]
#[command(name = "floatfarm", version, about = "Plan and simulate growth-seeking drifting farms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the built-in desk-scale scenario config as JSON.
    ExampleConfig {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        missions: usize,
    },
    /// Materialize truth, average currents, growth map and missions.
    GenScenario {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// One backward value-function solve.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[arg(long)]
        flow: PathBuf,
        /// Growth-rate field (1/s), used as the running reward.
        #[arg(long)]
        growth: PathBuf,
        /// Single-slice terminal value; zero when absent.
        #[arg(long)]
        terminal: Option<PathBuf>,
        /// Respiration rate subtracted from the growth field (1/s).
        #[arg(long, default_value_t = 0.0)]
        resp: f64,
        /// Lit fraction of each day; the growth field is gated by daylight when given.
        #[arg(long)]
        light_fraction: Option<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        umax: f64,
        #[arg(long)]
        t0: f64,
        #[arg(long = "T")]
        t_end: f64,
        /// Spacing of the stored output slices (s).
        #[arg(long, default_value_t = 3600.0)]
        out_dt: f64,
        #[arg(long, default_value_t = 0.5)]
        cfl: f64,
        #[arg(long, value_parser = ["upwind1", "eno2"], default_value = "upwind1")]
        scheme: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// One closed-loop mission.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// JSON file holding one controller spec.
        #[arg(long)]
        controller: PathBuf,
        #[arg(long)]
        mission: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Every mission against every controller.
    Batch {
        #[arg(long)]
        scenario: PathBuf,
        /// JSON file holding a list of controller specs.
        #[arg(long)]
        controllers: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Comma-separated mission ids; all missions when absent.
        #[arg(long, value_delimiter = ',')]
        missions: Option<Vec<usize>>,
        /// Controller label used for relative growth.
        #[arg(long)]
        baseline: Option<String>,
        /// Skip the per-mission results.jsonl.
        #[arg(long)]
        no_results: bool,
    },
    /// Relative-growth table across batch reports.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        baseline: String,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn gen_scenario(config: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let config = ScenarioConfig::from_json(&text)?;
    let scenario = Scenario::<f64>::generate(&config)?;
    scenario.save(out)?;
    println!(
        "{}",
        serde_json::json!({
            "out": out,
            "missions": scenario.missions.len(),
            "max_speed": scenario.truth.max_speed(),
        })
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    flow: &Path,
    growth: &Path,
    terminal: Option<&Path>,
    resp: f64,
    light_fraction: Option<f64>,
    tau: Option<f64>,
    umax: f64,
    t0: f64,
    t_end: f64,
    out_dt: f64,
    cfl: f64,
    scheme: &str,
    out: &Path,
) -> Result<()> {
    let flow = read_flow::<f64>(flow).with_context(|| format!("reading {}", flow.display()))?;
    let gross = read_scalar::<f64>(growth).with_context(|| format!("reading {}", growth.display()))?;
    let light = light_fraction.map(|f| LightCycle::new(SECONDS_PER_DAY, f)).transpose()?;
    let model = GrowthModel::new(gross, resp, light)?;
    let terminal: ScalarField<f64> = match terminal {
        Some(p) => read_scalar(p).with_context(|| format!("reading {}", p.display()))?,
        None => zero_terminal(&flow.grid, t_end)?,
    };
    let (scheme, integrator) = match scheme {
        "eno2" => (SpatialScheme::Eno2, TimeIntegrator::TvdRk2),
        _ => (SpatialScheme::Upwind1, TimeIntegrator::Euler),
    };
    let config = SolveConfig::new(umax).with_tau(tau).with_cfl(cfl).with_scheme(scheme).with_integrator(integrator);
    let output = TimeAxis::spanning(t0, t_end, out_dt)?;
    let vf = solve_backward(&flow, &model, &terminal, t0, t_end, &config, &output)?;
    vf.write(out)?;
    let start = vf.start_slice();
    let (lo, hi) = start.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    println!("{}", serde_json::json!({ "out": out, "slices": vf.time().nt, "start_min": lo, "start_max": hi }));
    Ok(())
}

fn run(scenario: &Path, controller: &Path, mission: usize, out: &Path) -> Result<()> {
    let scenario = Scenario::<f64>::load(scenario).with_context(|| format!("loading scenario {}", scenario.display()))?;
    let spec: ControllerSpec = read_json(controller)?;
    let m = scenario.mission(mission)?;
    let result = run_mission(m, &spec, &scenario.truth, &scenario.provider(), &scenario.avg, &scenario.growth, &scenario.run_options())?;
    fs::create_dir_all(out)?;
    fs::write(out.join("result.json"), serde_json::to_string_pretty(&result)? + "\n")?;
    write_trajectory_csv(out.join("trajectory.csv"), &result)?;
    println!(
        "{}",
        serde_json::json!({
            "mission_id": result.mission_id,
            "controller": result.controller,
            "final_mass": result.final_mass,
            "termination": result.termination,
        })
    );
    Ok(())
}

fn batch(
    scenario: &Path,
    controllers: &Path,
    out: &Path,
    jobs: usize,
    missions: Option<&[usize]>,
    baseline: Option<&str>,
    no_results: bool,
) -> Result<()> {
    let scenario = Scenario::<f64>::load(scenario).with_context(|| format!("loading scenario {}", scenario.display()))?;
    let specs: Vec<ControllerSpec> = read_json(controllers)?;
    let (report, results) = run_batch(&scenario, &specs, missions, jobs, baseline)?;
    write_report(out, &report, (!no_results).then_some(results.as_slice()))?;
    for agg in &report.intersection {
        eprintln!(
            "{:<24} n={:<4} mean_mass={:>10.3} rel_growth={:>8.3}%",
            agg.controller, agg.missions, agg.mean_final_mass, agg.mean_relative_growth
        );
    }
    Ok(())
}

fn compare_cmd(reports: &[PathBuf], baseline: &str, out: Option<&Path>) -> Result<()> {
    let loaded = reports
        .iter()
        .map(|p| {
            let p = if p.is_dir() { p.join("report.json") } else { p.clone() };
            read_json::<BatchReport>(&p)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = compare(&loaded, baseline)?;
    match out {
        Some(path) => write_compare_csv(fs::File::create(path)?, &rows)?,
        None => write_compare_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ExampleConfig { seed, missions } => {
            println!("{}", serde_json::to_string_pretty(&desk_config(seed, missions))?);
            Ok(())
        }
        Command::GenScenario { config, out } => gen_scenario(&config, &out),
        Command::Solve {
            flow,
            growth,
            terminal,
            resp,
            light_fraction,
            tau,
            umax,
            t0,
            t_end,
            out_dt,
            cfl,
            scheme,
            out,
        } => solve(&flow, &growth, terminal.as_deref(), resp, light_fraction, tau, umax, t0, t_end, out_dt, cfl, &scheme, &out),
        Command::Run {
            scenario,
            controller,
            mission,
            out,
        } => run(&scenario, &controller, mission, &out),
        Command::Batch {
            scenario,
            controllers,
            out,
            jobs,
            missions,
            baseline,
            no_results,
        } => {
            if jobs == 0 {
                bail!("--jobs must be >= 1");
            }
            batch(&scenario, &controllers, &out, jobs, missions.as_deref(), baseline.as_deref(), no_results)
        }
        Command::Compare { reports, baseline, out } => compare_cmd(&reports, &baseline, out.as_deref()),
    }
}

fn error_line(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // Everything before clap's usage block, folded onto one line.
            let rendered = e.render().to_string();
            let text: Vec<&str> = rendered.lines().map(str::trim).take_while(|l| !l.is_empty() && !l.starts_with("Usage:")).collect();
            eprintln!("{}", error_line("usage", text.join(" ").trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<floatfarm::Error>().map(floatfarm::Error::kind))
                .or_else(|| e.chain().find_map(|c| c.downcast_ref::<std::io::Error>().map(|_| "io")))
                .or_else(|| e.chain().find_map(|c| c.downcast_ref::<serde_json::Error>().map(|_| "json")))
                .unwrap_or("invalid_argument");
            let message = format!("{e:#}").replace('\n', " ");
            eprintln!("{}", error_line(kind, &message));
            ExitCode::from(1)
        }
    }
}
