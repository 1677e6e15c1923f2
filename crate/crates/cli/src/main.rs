use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use helmsim_core::batch::Execution;
use helmsim_core::harness::{
    cmd_compare, cmd_simulate, cmd_validate, report_json, HarnessError, Preset, SimulateOptions,
    ValidateOptions, DEFAULT_R_MAX,
};
use helmsim_core::ShipState;

/// 3-DoF ship maneuvering simulator and trajectory validator.
#[derive(Debug, Parser)]
#[command(name = "helmsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a control schedule or preset maneuver and emit a trajectory CSV.
    Simulate(SimulateArgs),
    /// Score a predicted trajectory against a truth trajectory.
    Compare(CompareArgs),
    /// Replay recorded voyages window by window and score every segment.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct Step {
    /// Time step in seconds.
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    /// Number of integration steps per run.
    #[arg(long, default_value_t = 120)]
    steps: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Vessel config JSON; the built-in synthetic vessel if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "controls")]
    preset: Option<Preset>,
    /// Control schedule CSV: t_s,rudder_deg,rpm.
    #[arg(long)]
    controls: Option<PathBuf>,
    /// Weather CSV; calm if omitted. Times are taken relative to the first row.
    #[arg(long)]
    weather: Option<PathBuf>,
    /// Initial surge speed in m/s (ignored with --preset).
    #[arg(long, default_value_t = 0.0)]
    u0: f64,
    /// Initial heading in degrees (ignored with --preset).
    #[arg(long, default_value_t = 0.0)]
    psi0_deg: f64,
    #[command(flatten)]
    step: Step,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Truth trajectory CSV.
    truth: PathBuf,
    /// Predicted trajectory CSV.
    prediction: PathBuf,
    /// Maximum yaw rate in rad/s.
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    r_max: f64,
    /// Directory for report.json and the plot bundle.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Glob matching voyage CSV files.
    voyages: String,
    /// Weather CSV shared by all voyages.
    #[arg(long)]
    weather: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    step: Step,
    /// Knots between window starts; defaults to --steps.
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    r_max: f64,
    /// Directory for report.json and per-segment plot bundles.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Process segments on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Simulate(a) => {
            let opts = SimulateOptions {
                config: a.config,
                preset: a.preset,
                controls: a.controls,
                weather: a.weather,
                initial: ShipState {
                    u: a.u0,
                    psi: a.psi0_deg.to_radians(),
                    ..ShipState::default()
                },
                dt: a.step.dt,
                steps: a.step.steps,
            };
            let csv = cmd_simulate(&opts)?.to_csv_string();
            emit(a.out.as_deref(), &csv)
        }
        Command::Compare(a) => {
            let report = cmd_compare(&a.truth, &a.prediction, a.r_max, a.out.as_deref())?;
            emit(None, &report_json(&report))
        }
        Command::Validate(a) => {
            let mut opts = ValidateOptions::new(a.voyages);
            opts.weather = a.weather;
            opts.config = a.config;
            opts.dt = a.step.dt;
            opts.steps = a.step.steps;
            opts.stride = a.stride;
            opts.r_max = a.r_max;
            opts.out = a.out;
            opts.execution = if a.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let report = cmd_validate(&opts)?;
            let agg = &report.aggregate;
            log::info!(
                "{} segments: {} optimal, {} satisfactory, {} sub-optimal, {} failed; {} windows dropped",
                agg.total_segments,
                agg.optimal,
                agg.satisfactory,
                agg.sub_optimal,
                agg.failed,
                agg.dropped_windows
            );
            emit(None, &report.to_json())
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    let (result, name) = match path {
        Some(p) => (std::fs::write(p, text), p.display().to_string()),
        None => (
            std::io::stdout().lock().write_all(text.as_bytes()),
            "stdout".to_string(),
        ),
    };
    result.map_err(|source| HarnessError::Output { path: name, source })
}
