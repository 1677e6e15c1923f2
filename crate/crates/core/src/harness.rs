//! Batch entry points behind the `helmsim` CLI: simulate, compare, validate.
//!
//! Output files:
//!
//! * trajectory CSV, see [`crate::trajectory::TRAJECTORY_COLUMNS`]
//! * `report.json`, a [`MeasureReport`] or [`ValidationReport`]
//! * plot bundles: `track.csv`, `heading.csv`, `speeds.csv`, `yaw_rate.csv`
//!   and `manifest.json`, one row per knot, truth next to prediction
//!
//! Floats are written at 9 significant digits.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch::{self, Execution};
use crate::config::{ConfigError, Vessel};
use crate::dynamics::{simulate, ControlInput, ControlSeries, DynamicsError, ShipState};
use crate::environment::{load_weather, EnvironmentError, EnvironmentSample, EnvironmentSeries};
use crate::geometry::{body_to_earth, wrap_pi, EarthVector};
use crate::measures::{measure_all, Category, CategoryThresholds, MeasureError, MeasureReport};
use crate::textio::{csv_line, format_timestamp, round_sig9, CsvError, CsvTable};
use crate::trajectory::Trajectory;
use crate::voyage::{
    load_voyage, segment_voyage, GeoPoint, SegmentOptions, ValidationSegment, VoyageError,
    VoyageRecord, R_EARTH,
};

pub const DEFAULT_DT: f64 = 1.0;
pub const DEFAULT_STEPS: usize = 120;
/// rad/s
pub const DEFAULT_R_MAX: f64 = 0.0314;

const KNOT: f64 = 1852.0 / 3600.0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Voyage(#[from] VoyageError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("simulation failed: {0}")]
    Simulation(#[from] DynamicsError),
    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Output { .. } => 1,
            HarnessError::Simulation(e) => match root(e) {
                DynamicsError::NonFinite { .. } => 1,
                _ => 2,
            },
            _ => 2,
        }
    }
}

fn root(e: &DynamicsError) -> &DynamicsError {
    match e {
        DynamicsError::AtStep { source, .. } => root(source),
        other => other,
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Output {
        path: path.display().to_string(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(path).map_err(|source| HarnessError::Output {
        path: path.display().to_string(),
        source,
    })
}

/// Pretty JSON with a trailing newline.
pub fn report_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// The built-in synthetic vessel, or the config at `path`.
pub fn load_vessel(path: Option<&Path>) -> Result<Vessel, HarnessError> {
    Ok(match path {
        Some(p) => Vessel::load(p)?,
        None => Vessel::synthetic(),
    })
}

/// Turning-circle maneuvers: 106 RPM from 6 kn ahead with ±35° rudder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    TurnStarboard35,
    TurnPort35,
}

impl Preset {
    pub const RPM: f64 = 106.0;
    pub const SPEED_KN: f64 = 6.0;
    pub const RUDDER_DEG: f64 = 35.0;

    pub fn name(&self) -> &'static str {
        match self {
            Preset::TurnStarboard35 => "turn-starboard-35",
            Preset::TurnPort35 => "turn-port-35",
        }
    }

    pub fn initial(&self) -> ShipState {
        ShipState {
            u: Self::SPEED_KN * KNOT,
            ..ShipState::default()
        }
    }

    pub fn control(&self) -> ControlInput {
        let sign = match self {
            Preset::TurnStarboard35 => 1.0,
            Preset::TurnPort35 => -1.0,
        };
        ControlInput {
            rudder: sign * Self::RUDDER_DEG.to_radians(),
            n: Self::RPM / 60.0,
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "turn-starboard-35" => Ok(Preset::TurnStarboard35),
            "turn-port-35" => Ok(Preset::TurnPort35),
            _ => Err(format!(
                "unknown preset `{s}` (expected turn-starboard-35 or turn-port-35)"
            )),
        }
    }
}

pub const CONTROL_COLUMNS: [&str; 3] = ["t_s", "rudder_deg", "rpm"];

/// Reads a control schedule CSV (`t_s,rudder_deg,rpm`), held between rows.
pub fn load_controls(path: impl AsRef<Path>) -> Result<ControlSeries, HarnessError> {
    let table = CsvTable::read(path.as_ref())?;
    table.require(&CONTROL_COLUMNS)?;
    let mut samples: Vec<(f64, ControlInput)> = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let t = table.f64_field(row, "t_s")?;
        let rudder = table.f64_field(row, "rudder_deg")?;
        let rpm = table.f64_field(row, "rpm")?;
        if rudder.abs() > 45.0 {
            return Err(table
                .field_err(row, "rudder_deg", "rudder angle must lie within ±45°")
                .into());
        }
        if rpm < 0.0 {
            return Err(table.field_err(row, "rpm", "rpm must be >= 0").into());
        }
        if samples.last().is_some_and(|(p, _)| t <= *p) {
            return Err(table
                .row_err(row, "times must be strictly increasing")
                .into());
        }
        samples.push((
            t,
            ControlInput {
                rudder: rudder.to_radians(),
                n: rpm / 60.0,
            },
        ));
    }
    if samples.is_empty() {
        return Err(HarnessError::Input(format!(
            "{}: no control rows",
            table.path
        )));
    }
    Ok(ControlSeries::new(samples)?)
}

/// Weather file with its first row moved to t = 0, or calm conditions.
pub fn load_relative_weather(path: Option<&Path>) -> Result<EnvironmentSeries, HarnessError> {
    match path {
        Some(p) => {
            let series = load_weather(p)?;
            let t0 = series.samples()[0].0;
            Ok(series.shifted(t0))
        }
        None => Ok(EnvironmentSeries::calm()),
    }
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub config: Option<PathBuf>,
    pub preset: Option<Preset>,
    pub controls: Option<PathBuf>,
    pub weather: Option<PathBuf>,
    /// Used unless a preset supplies the initial state.
    pub initial: ShipState,
    pub dt: f64,
    pub steps: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            config: None,
            preset: None,
            controls: None,
            weather: None,
            initial: ShipState::default(),
            dt: DEFAULT_DT,
            steps: DEFAULT_STEPS,
        }
    }
}

pub fn cmd_simulate(opts: &SimulateOptions) -> Result<Trajectory, HarnessError> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(HarnessError::Input(format!(
            "--dt must be > 0, got {}",
            opts.dt
        )));
    }
    if opts.steps == 0 {
        return Err(HarnessError::Input("--steps must be >= 1".into()));
    }
    let vessel = load_vessel(opts.config.as_deref())?;
    let env = load_relative_weather(opts.weather.as_deref())?;
    let (initial, controls) = match (&opts.preset, &opts.controls) {
        (Some(_), Some(_)) => {
            return Err(HarnessError::Input(
                "--preset and --controls are mutually exclusive".into(),
            ))
        }
        (Some(p), None) => (p.initial(), ControlSeries::constant(p.control())),
        (None, Some(path)) => (opts.initial, load_controls(path)?),
        (None, None) => {
            return Err(HarnessError::Input(
                "either --preset or --controls is required".into(),
            ))
        }
    };
    Ok(simulate(
        &vessel, &initial, &controls, &env, opts.dt, opts.steps,
    )?)
}

/// One plot panel: a header and equally long rows.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotPanel {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Truth-versus-prediction series for the track, heading, speed and yaw-rate panels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotBundle {
    pub panels: Vec<PlotPanel>,
}

#[derive(Serialize)]
struct ManifestPanel<'a> {
    name: &'a str,
    file: String,
    columns: &'a [&'static str],
    rows: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    knots: usize,
    dt: f64,
    panels: Vec<ManifestPanel<'a>>,
}

impl PlotBundle {
    /// Panels for an aligned pair (lengths must already match).
    pub fn new(truth: &Trajectory, prediction: &Trajectory) -> Self {
        let pairs: Vec<_> = truth.records().iter().zip(prediction.records()).collect();
        let panel =
            |name, columns: Vec<&'static str>, f: &dyn Fn(&ShipState, &ShipState) -> Vec<f64>| {
                PlotPanel {
                    name,
                    columns,
                    rows: pairs
                        .iter()
                        .map(|(a, b)| {
                            let mut row = vec![a.t];
                            row.extend(f(&a.state, &b.state));
                            row
                        })
                        .collect(),
                }
            };
        Self {
            panels: vec![
                panel(
                    "track",
                    vec!["t", "x_truth", "y_truth", "x_pred", "y_pred"],
                    &|a, b| vec![a.x, a.y, b.x, b.y],
                ),
                panel("heading", vec!["t", "psi_truth", "psi_pred"], &|a, b| {
                    vec![a.psi, b.psi]
                }),
                panel(
                    "speeds",
                    vec!["t", "u_truth", "u_pred", "v_truth", "v_pred"],
                    &|a, b| vec![a.u, b.u, a.v, b.v],
                ),
                panel("yaw_rate", vec!["t", "r_truth", "r_pred"], &|a, b| {
                    vec![a.r, b.r]
                }),
            ],
        }
    }

    pub fn write(&self, dir: &Path, dt: f64) -> Result<(), HarnessError> {
        create_dir(dir)?;
        let mut manifest = Manifest {
            knots: 0,
            dt,
            panels: Vec::new(),
        };
        for p in &self.panels {
            let mut text = p.columns.join(",");
            text.push('\n');
            for row in &p.rows {
                text.push_str(&csv_line(row.iter().copied()));
                text.push('\n');
            }
            let file = format!("{}.csv", p.name);
            write_file(&dir.join(&file), text)?;
            manifest.knots = p.rows.len();
            manifest.panels.push(ManifestPanel {
                name: p.name,
                file,
                columns: &p.columns,
                rows: p.rows.len(),
            });
        }
        write_file(&dir.join("manifest.json"), report_json(&manifest))
    }
}

/// Scores `prediction` against `truth`; writes `report.json` and the plot bundle into `out`.
pub fn cmd_compare(
    truth: &Path,
    prediction: &Path,
    r_max: f64,
    out: Option<&Path>,
) -> Result<MeasureReport, HarnessError> {
    check_r_max(r_max)?;
    let truth = Trajectory::read_csv(truth)?;
    let prediction = Trajectory::read_csv(prediction)?;
    let report = measure_all(&truth, &prediction, r_max, &CategoryThresholds::default())?.rounded();
    if let Some(dir) = out {
        create_dir(dir)?;
        write_file(&dir.join("report.json"), report_json(&report))?;
        PlotBundle::new(&truth, &prediction).write(dir, truth.dt())?;
    }
    Ok(report)
}

fn check_r_max(r_max: f64) -> Result<(), HarnessError> {
    if r_max > 0.0 && r_max.is_finite() {
        Ok(())
    } else {
        Err(HarnessError::Input(format!(
            "--r-max must be > 0, got {r_max}"
        )))
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    /// Glob selecting voyage CSVs.
    pub voyages: String,
    pub weather: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub dt: f64,
    pub steps: usize,
    /// Knots between window starts; defaults to `steps`.
    pub stride: Option<usize>,
    pub r_max: f64,
    /// Report and plot directory; nothing is written when `None`.
    pub out: Option<PathBuf>,
    pub execution: Execution,
}

impl ValidateOptions {
    pub fn new(voyages: impl Into<String>) -> Self {
        Self {
            voyages: voyages.into(),
            weather: None,
            config: None,
            dt: DEFAULT_DT,
            steps: DEFAULT_STEPS,
            stride: None,
            r_max: DEFAULT_R_MAX,
            out: None,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSettings {
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentEntry {
    pub voyage_id: String,
    pub window: usize,
    pub start_time: String,
    pub mean_abs_rudder_deg: f64,
    pub mean_rpm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MeasureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropEntry {
    pub voyage_id: String,
    pub window: usize,
    pub start_time: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoyageSummary {
    pub voyage_id: String,
    pub records: usize,
    pub segments: usize,
    pub dropped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregate {
    pub total_segments: usize,
    pub optimal: usize,
    pub satisfactory: usize,
    pub sub_optimal: usize,
    pub failed: usize,
    pub dropped_windows: usize,
    pub failed_voyages: usize,
    pub mean_cvdm_pct: Option<f64>,
    pub max_cvdm_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub settings: ValidationSettings,
    pub aggregate: Aggregate,
    pub voyages: Vec<VoyageSummary>,
    pub segments: Vec<SegmentEntry>,
    pub dropped: Vec<DropEntry>,
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        report_json(self)
    }
}

fn aggregate(segments: &[SegmentEntry], dropped: usize, failed_voyages: usize) -> Aggregate {
    let mut agg = Aggregate {
        total_segments: segments.len(),
        dropped_windows: dropped,
        failed_voyages,
        ..Default::default()
    };
    let mut cvdms = Vec::new();
    for s in segments {
        match &s.report {
            Some(r) => {
                cvdms.push(r.cvdm_pct);
                match r.category {
                    Category::Optimal => agg.optimal += 1,
                    Category::Satisfactory => agg.satisfactory += 1,
                    Category::SubOptimal => agg.sub_optimal += 1,
                }
            }
            None => agg.failed += 1,
        }
    }
    if !cvdms.is_empty() {
        agg.mean_cvdm_pct = Some(round_sig9(cvdms.iter().sum::<f64>() / cvdms.len() as f64));
        agg.max_cvdm_pct = Some(cvdms.iter().copied().fold(f64::MIN, f64::max));
    }
    agg
}

fn voyage_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Voyage files matching `pattern`, sorted by path.
pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>, HarnessError> {
    let paths = glob::glob(pattern)
        .map_err(|e| HarnessError::Input(format!("bad voyage glob `{pattern}`: {e}")))?;
    let mut files: Vec<PathBuf> = paths
        .filter_map(Result::ok)
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(HarnessError::Input(format!(
            "no voyage files match `{pattern}`"
        )));
    }
    Ok(files)
}

struct Job {
    voyage: usize,
    segment: ValidationSegment,
}

fn replay(
    vessel: &Vessel,
    seg: &ValidationSegment,
    opts: &ValidateOptions,
) -> Result<(Trajectory, MeasureReport), HarnessError> {
    let prediction = simulate(
        vessel,
        &seg.initial,
        &seg.controls,
        &seg.env,
        opts.dt,
        opts.steps,
    )?;
    let report = measure_all(
        &seg.truth,
        &prediction,
        opts.r_max,
        &CategoryThresholds::default(),
    )?
    .rounded();
    Ok((prediction, report))
}

/// Replays every window of every matching voyage and scores it.
///
/// Per-voyage and per-segment failures are recorded in the report; only bad
/// arguments, an empty glob, an unreadable config or weather file, or an
/// output write failure abort the run.
pub fn cmd_validate(opts: &ValidateOptions) -> Result<ValidationReport, HarnessError> {
    check_r_max(opts.r_max)?;
    if !(opts.dt > 0.0 && opts.dt.is_finite()) || opts.steps == 0 || opts.stride == Some(0) {
        return Err(HarnessError::Input(
            "--dt must be > 0 and --steps, --stride >= 1".into(),
        ));
    }
    let files = expand_glob(&opts.voyages)?;
    let vessel = load_vessel(opts.config.as_deref())?;
    let env = match &opts.weather {
        Some(p) => load_weather(p)?,
        None => EnvironmentSeries::calm(),
    };
    let seg_opts = SegmentOptions {
        n: opts.steps,
        dt: opts.dt,
        stride: opts.stride.unwrap_or(opts.steps),
    };

    let ids: Vec<String> = files.iter().map(|p| voyage_id(p)).collect();
    let loaded = batch::map(&files, opts.execution, |path| {
        load_voyage(path).and_then(|recs| Ok((recs.len(), segment_voyage(&recs, &env, seg_opts)?)))
    });

    let mut voyages = Vec::new();
    let mut dropped = Vec::new();
    let mut jobs = Vec::new();
    for (i, result) in loaded.into_iter().enumerate() {
        let voyage_id = ids[i].clone();
        match result {
            Ok((records, seg)) => {
                voyages.push(VoyageSummary {
                    voyage_id: voyage_id.clone(),
                    records,
                    segments: seg.segments.len(),
                    dropped: seg.dropped.len(),
                    error: None,
                });
                dropped.extend(seg.dropped.into_iter().map(|d| DropEntry {
                    voyage_id: voyage_id.clone(),
                    window: d.window,
                    start_time: format_timestamp(d.start_time),
                    reason: d.reason,
                }));
                jobs.extend(
                    seg.segments
                        .into_iter()
                        .map(|segment| Job { voyage: i, segment }),
                );
            }
            Err(e) => voyages.push(VoyageSummary {
                voyage_id,
                records: 0,
                segments: 0,
                dropped: 0,
                error: Some(e.to_string()),
            }),
        }
    }

    let outcomes = batch::map(
        &jobs,
        opts.execution,
        |job| -> Result<SegmentEntry, HarnessError> {
            let seg = &job.segment;
            let voyage_id = &ids[job.voyage];
            let mut entry = SegmentEntry {
                voyage_id: voyage_id.clone(),
                window: seg.window,
                start_time: format_timestamp(seg.start_time),
                mean_abs_rudder_deg: round_sig9(seg.mean_abs_rudder().to_degrees()),
                mean_rpm: round_sig9(seg.mean_rpm()),
                report: None,
                error: None,
            };
            match replay(&vessel, seg, opts) {
                Ok((prediction, report)) => {
                    entry.report = Some(report);
                    if let Some(out) = &opts.out {
                        let dir = out
                            .join("segments")
                            .join(format!("{voyage_id}_w{:04}", seg.window));
                        PlotBundle::new(&seg.truth, &prediction).write(&dir, opts.dt)?;
                        write_file(&dir.join("truth.csv"), seg.truth.to_csv_string())?;
                        write_file(&dir.join("prediction.csv"), prediction.to_csv_string())?;
                    }
                }
                Err(e) => entry.error = Some(e.to_string()),
            }
            Ok(entry)
        },
    );
    let mut segments = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    segments.sort_by(|a, b| (&a.voyage_id, a.window).cmp(&(&b.voyage_id, b.window)));
    dropped.sort_by(|a, b| (&a.voyage_id, a.window).cmp(&(&b.voyage_id, b.window)));
    voyages.sort_by(|a, b| a.voyage_id.cmp(&b.voyage_id));

    let failed_voyages = voyages.iter().filter(|v| v.error.is_some()).count();
    let report = ValidationReport {
        settings: ValidationSettings {
            dt: opts.dt,
            steps: opts.steps,
            stride: seg_opts.stride,
            r_max: opts.r_max,
        },
        aggregate: aggregate(&segments, dropped.len(), failed_voyages),
        voyages,
        segments,
        dropped,
    };
    if let Some(out) = &opts.out {
        create_dir(out)?;
        write_file(&out.join("report.json"), report.to_json())?;
    }
    Ok(report)
}

/// Layout of a simulator-generated voyage.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticOptions {
    pub duration_s: usize,
    /// Epoch seconds of the first fix.
    pub start_time: f64,
    pub origin: GeoPoint,
    pub initial_speed: f64,
    pub initial_heading: f64,
    /// Added to the logged heading only, rad.
    pub heading_bias: f64,
    /// Weather is constant over blocks of this length, s.
    pub weather_period_s: usize,
    /// Controls change every this many seconds.
    pub control_period_s: usize,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            duration_s: 3600,
            start_time: 1_700_000_000.0,
            origin: GeoPoint {
                lat: 57.6,
                lon: 11.7,
            },
            initial_speed: 6.0 * KNOT,
            initial_heading: 0.6,
            heading_bias: 0.0,
            weather_period_s: 600,
            control_period_s: 45,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticVoyage {
    pub records: Vec<VoyageRecord>,
    /// Hindcast with epoch-second timestamps.
    pub weather: EnvironmentSeries,
    /// The simulated run the log was written from.
    pub trajectory: Trajectory,
}

const RUDDER_SCHEDULE_DEG: [f64; 10] = [5.0, -10.0, 15.0, 0.0, -20.0, 10.0, -5.0, 25.0, -15.0, 0.0];
const RPM_SCHEDULE: [f64; 5] = [106.0, 100.0, 110.0, 95.0, 106.0];

/// Simulates a voyage with a fixed control and weather schedule and logs it
/// as 1 Hz fixes. Positions are accumulated step by step on the sphere.
pub fn synthetic_voyage(
    vessel: &Vessel,
    opts: &SyntheticOptions,
) -> Result<SyntheticVoyage, HarnessError> {
    let dt = 1.0;
    let controls: Vec<_> = (0..=opts.duration_s / opts.control_period_s.max(1))
        .map(|i| {
            let t = (i * opts.control_period_s) as f64;
            let rudder = RUDDER_SCHEDULE_DEG[i % RUDDER_SCHEDULE_DEG.len()].to_radians();
            let rpm = RPM_SCHEDULE[(i / 2) % RPM_SCHEDULE.len()];
            (
                t,
                ControlInput {
                    rudder,
                    n: rpm / 60.0,
                },
            )
        })
        .collect();
    let weather_rel: Vec<_> = (0..=opts.duration_s / opts.weather_period_s.max(1))
        .map(|i| {
            let f = i as f64;
            let sample = EnvironmentSample::from_met(
                7.0 + 2.0 * (0.7 * f).sin(),
                (40.0 + 25.0 * f) % 360.0,
                1.2 + 0.3 * (0.5 * f).cos(),
                (20.0 + 35.0 * f) % 360.0,
                0.4 + 0.1 * (0.9 * f).sin(),
                (110.0 + 20.0 * f) % 360.0,
            );
            ((i * opts.weather_period_s) as f64, sample)
        })
        .collect();
    let env = EnvironmentSeries::new(weather_rel.clone())?;
    let initial = ShipState {
        u: opts.initial_speed,
        psi: opts.initial_heading,
        ..ShipState::default()
    };
    let trajectory = simulate(
        vessel,
        &initial,
        &ControlSeries::new(controls)?,
        &env,
        dt,
        opts.duration_s,
    )?;

    let mut records = Vec::with_capacity(trajectory.len());
    let mut lat = opts.origin.lat;
    let mut lon = opts.origin.lon;
    let mut prev = (0.0, 0.0);
    for rec in trajectory.records() {
        let s = &rec.state;
        let dlat = ((s.x - prev.0) / R_EARTH).to_degrees();
        let mid = (lat + 0.5 * dlat).to_radians();
        lon = wrap_lon(lon + ((s.y - prev.1) / (R_EARTH * mid.cos())).to_degrees());
        lat += dlat;
        prev = (s.x, s.y);
        let over_ground: EarthVector = body_to_earth(rec.ground.u, rec.ground.v, s.psi);
        records.push(VoyageRecord {
            t: opts.start_time + rec.t,
            lat,
            lon,
            heading: wrap_pi(s.psi + opts.heading_bias),
            sog: over_ground.norm(),
            cog: over_ground.east.atan2(over_ground.north),
            yaw_rate: s.r,
            rudder: rec.control.rudder,
            rpm: rec.control.n * 60.0,
        });
    }
    let weather = EnvironmentSeries::new(
        weather_rel
            .into_iter()
            .map(|(t, s)| (t + opts.start_time, s))
            .collect(),
    )?;
    Ok(SyntheticVoyage {
        records,
        weather,
        trajectory,
    })
}

fn wrap_lon(lon: f64) -> f64 {
    (lon + 180.0).rem_euclid(360.0) - 180.0
}
