//! Recorded voyage logs: ingestion, local projection and segmentation into
//! fixed-length validation windows.
//!
//! Voyage CSV columns:
//!
//! ```text
//! timestamp_iso8601, lat_deg, lon_deg, heading_deg, sog_mps, cog_deg, yaw_rate_degmin, rudder_deg, rpm
//! ```
//!
//! Headings and courses are degrees clockwise from north, the rudder angle is
//! positive to starboard. Angles are converted to radians at ingestion.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::dynamics::{water_velocities, ControlInput, ControlSeries, GroundVelocity, ShipState};
use crate::environment::EnvironmentSeries;
use crate::geometry::{earth_to_body, wrap_pi, wrap_two_pi, EarthVector};
use crate::textio::{fmt_sig9, format_timestamp, CsvError, CsvTable};
use crate::trajectory::{SimulationRecord, Trajectory};

/// Mean earth radius used by the local projection, m.
pub const R_EARTH: f64 = 6_371_000.0;
/// Largest planar distance from the projection anchor, m.
pub const PROJECTION_RANGE: f64 = 50_000.0;
/// Largest spacing between raw fixes bridged by interpolation, s.
pub const GAP_EPS: f64 = 3.0;

pub const VOYAGE_COLUMNS: [&str; 9] = [
    "timestamp_iso8601",
    "lat_deg",
    "lon_deg",
    "heading_deg",
    "sog_mps",
    "cog_deg",
    "yaw_rate_degmin",
    "rudder_deg",
    "rpm",
];

#[derive(Debug, Error)]
pub enum VoyageError {
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("{path}: no records")]
    Empty { path: String },
    #[error("point {index} is {distance:.0} m from the projection anchor (limit {limit:.0} m)")]
    OutOfRange {
        index: usize,
        distance: f64,
        limit: f64,
    },
    #[error("invalid segmentation: {0}")]
    Segmentation(String),
}

/// One logged fix. Angles in radians, time in seconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VoyageRecord {
    pub t: f64,
    /// deg
    pub lat: f64,
    /// deg, in `[-180, 180)`
    pub lon: f64,
    pub heading: f64,
    /// speed over ground, m/s
    pub sog: f64,
    /// course over ground
    pub cog: f64,
    /// rad/s
    pub yaw_rate: f64,
    pub rudder: f64,
    pub rpm: f64,
}

impl VoyageRecord {
    pub fn position(&self) -> GeoPoint {
        GeoPoint {
            lat: self.lat,
            lon: self.lon,
        }
    }

    /// Earth-frame velocity over ground.
    pub fn ground_velocity(&self) -> EarthVector {
        EarthVector::from_bearing(self.sog, self.cog)
    }
}

/// Geodetic position, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

/// Reads and validates a voyage CSV.
///
/// Rows must be in strictly increasing time order; a duplicate or earlier
/// timestamp is an error naming the row.
pub fn load_voyage(path: impl AsRef<Path>) -> Result<Vec<VoyageRecord>, VoyageError> {
    let table = CsvTable::read(path.as_ref())?;
    table.require(&VOYAGE_COLUMNS)?;
    if table.rows.is_empty() {
        return Err(VoyageError::Empty {
            path: table.path.clone(),
        });
    }
    let mut out: Vec<VoyageRecord> = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let t = table.time_field(row, "timestamp_iso8601")?;
        let get = |c: &str| table.f64_field(row, c);
        let lat = get("lat_deg")?;
        let lon = get("lon_deg")?;
        let heading = get("heading_deg")?;
        let sog = get("sog_mps")?;
        let cog = get("cog_deg")?;
        let yaw = get("yaw_rate_degmin")?;
        let rudder = get("rudder_deg")?;
        let rpm = get("rpm")?;
        let bad = |c: &str, m: &str| Err(VoyageError::from(table.field_err(row, c, m)));
        if !(-90.0..=90.0).contains(&lat) {
            return bad("lat_deg", "latitude must lie in [-90, 90]");
        }
        if !(-180.0..180.0).contains(&lon) {
            return bad("lon_deg", "longitude must lie in [-180, 180)");
        }
        if rudder.abs() > 45.0 {
            return bad("rudder_deg", "rudder angle must lie within ±45°");
        }
        if rpm < 0.0 {
            return bad("rpm", "rpm must be >= 0");
        }
        if sog < 0.0 {
            return bad("sog_mps", "speed over ground must be >= 0");
        }
        if let Some(prev) = out.last() {
            if t == prev.t {
                return Err(table.row_err(row, "duplicate timestamp").into());
            }
            if t < prev.t {
                return Err(table.row_err(row, "timestamps must be increasing").into());
            }
        }
        out.push(VoyageRecord {
            t,
            lat,
            lon,
            heading: wrap_pi(heading.to_radians()),
            sog,
            cog: wrap_pi(cog.to_radians()),
            yaw_rate: yaw.to_radians() / 60.0,
            rudder: rudder.to_radians(),
            rpm,
        });
    }
    Ok(out)
}

/// Writes records in the voyage CSV layout: positions with 10 decimals,
/// other channels at 9 significant digits.
pub fn voyage_csv_string(records: &[VoyageRecord]) -> String {
    let mut out = VOYAGE_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{:.10},{:.10},{},{},{},{},{},{}",
            format_timestamp(r.t),
            r.lat,
            r.lon,
            fmt_sig9(wrap_two_pi(r.heading).to_degrees()),
            fmt_sig9(r.sog),
            fmt_sig9(wrap_two_pi(r.cog).to_degrees()),
            fmt_sig9(r.yaw_rate.to_degrees() * 60.0),
            fmt_sig9(r.rudder.to_degrees()),
            fmt_sig9(r.rpm),
        );
    }
    out
}

pub fn write_voyage(records: &[VoyageRecord], path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, voyage_csv_string(records))
}

fn lon_delta(lon: f64, anchor: f64) -> f64 {
    (lon - anchor + 180.0).rem_euclid(360.0) - 180.0
}

/// Equirectangular projection about `anchor`: `x = R·Δlat`, `y = R·cos(lat_anchor)·Δlon`.
pub fn project_point(p: GeoPoint, anchor: GeoPoint) -> (f64, f64) {
    let x = R_EARTH * (p.lat - anchor.lat).to_radians();
    let y = R_EARTH * anchor.lat.to_radians().cos() * lon_delta(p.lon, anchor.lon).to_radians();
    (x, y)
}

/// Inverse of [`project_point`].
pub fn unproject_point(x: f64, y: f64, anchor: GeoPoint) -> GeoPoint {
    let lat = anchor.lat + (x / R_EARTH).to_degrees();
    let dlon = (y / (R_EARTH * anchor.lat.to_radians().cos())).to_degrees();
    GeoPoint {
        lat,
        lon: lon_delta(anchor.lon + dlon, 0.0),
    }
}

/// Projects every record to local north/east metres about `anchor`.
pub fn project_to_local(
    records: &[VoyageRecord],
    anchor: GeoPoint,
) -> Result<Vec<(f64, f64)>, VoyageError> {
    records
        .iter()
        .enumerate()
        .map(|(index, r)| {
            let (x, y) = project_point(r.position(), anchor);
            let distance = x.hypot(y);
            if distance > PROJECTION_RANGE {
                Err(VoyageError::OutOfRange {
                    index,
                    distance,
                    limit: PROJECTION_RANGE,
                })
            } else {
                Ok((x, y))
            }
        })
        .collect()
}

fn lerp(a: f64, b: f64, w: f64) -> f64 {
    a + (b - a) * w
}

fn lerp_angle(a: f64, b: f64, w: f64) -> f64 {
    wrap_pi(a + wrap_pi(b - a) * w)
}

/// Resamples records onto `t0 + k·dt`, `t0` being the first fix.
///
/// Continuous channels are interpolated linearly (headings along the short
/// arc, longitude across the antimeridian); rudder and rpm hold the previous
/// value. A grid point whose bracketing fixes are more than [`GAP_EPS`] apart
/// is `None`.
pub fn resample(records: &[VoyageRecord], dt: f64) -> Vec<Option<VoyageRecord>> {
    let (Some(first), Some(last)) = (records.first(), records.last()) else {
        return Vec::new();
    };
    let count = ((last.t - first.t) / dt + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    let mut hi = 0;
    for k in 0..count {
        let t = first.t + k as f64 * dt;
        while hi < records.len() && records[hi].t < t {
            hi += 1;
        }
        if hi < records.len() && records[hi].t == t {
            out.push(Some(records[hi]));
            continue;
        }
        if hi == 0 || hi >= records.len() {
            out.push(None);
            continue;
        }
        let (a, b) = (&records[hi - 1], &records[hi]);
        if b.t - a.t > GAP_EPS {
            out.push(None);
            continue;
        }
        let w = (t - a.t) / (b.t - a.t);
        out.push(Some(VoyageRecord {
            t,
            lat: lerp(a.lat, b.lat, w),
            lon: lon_delta(a.lon + lon_delta(b.lon, a.lon) * w, 0.0),
            heading: lerp_angle(a.heading, b.heading, w),
            sog: lerp(a.sog, b.sog, w),
            cog: lerp_angle(a.cog, b.cog, w),
            yaw_rate: lerp(a.yaw_rate, b.yaw_rate, w),
            rudder: a.rudder,
            rpm: a.rpm,
        }));
    }
    out
}

/// One validation window.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSegment {
    /// Window index within the voyage, counting dropped windows.
    pub window: usize,
    /// Epoch seconds of the first knot.
    pub start_time: f64,
    /// Projection anchor (the window's first fix).
    pub anchor: GeoPoint,
    /// n + 1 knots at `t = k·dt`, through-water velocities.
    pub truth: Trajectory,
    pub controls: ControlSeries,
    /// Weather slice with times relative to `start_time`.
    pub env: EnvironmentSeries,
    pub initial: ShipState,
}

impl ValidationSegment {
    pub fn mean_abs_rudder(&self) -> f64 {
        let s = self.controls.samples();
        s.iter().map(|(_, c)| c.rudder.abs()).sum::<f64>() / s.len() as f64
    }

    pub fn mean_rpm(&self) -> f64 {
        let s = self.controls.samples();
        s.iter().map(|(_, c)| c.n * 60.0).sum::<f64>() / s.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedWindow {
    pub window: usize,
    pub start_time: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SegmentedVoyage {
    pub segments: Vec<ValidationSegment>,
    pub dropped: Vec<DroppedWindow>,
}

/// Window layout for [`segment_voyage`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentOptions {
    /// Steps per window (the window holds `n + 1` knots).
    pub n: usize,
    /// s
    pub dt: f64,
    /// Knots between consecutive window starts; `n` gives back-to-back windows
    /// sharing their boundary knot.
    pub stride: usize,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self {
            n: 120,
            dt: 1.0,
            stride: 120,
        }
    }
}

/// Cuts a voyage into validation windows.
///
/// Each window is projected about its own first fix, and its initial state
/// recovers through-water (u, v) from the logged over-ground velocity and the
/// current at the window start. Windows containing a gap are dropped and
/// listed.
pub fn segment_voyage(
    records: &[VoyageRecord],
    env: &EnvironmentSeries,
    options: SegmentOptions,
) -> Result<SegmentedVoyage, VoyageError> {
    let SegmentOptions { n, dt, stride } = options;
    if n == 0 || stride == 0 || !(dt > 0.0 && dt.is_finite()) {
        return Err(VoyageError::Segmentation(format!(
            "n = {n}, dt = {dt}, stride = {stride}"
        )));
    }
    let grid = resample(records, dt);
    let mut out = SegmentedVoyage::default();
    if grid.len() <= n {
        return Ok(out);
    }
    let t0 = records[0].t;
    let windows = (grid.len() - 1 - n) / stride + 1;
    for window in 0..windows {
        let start = window * stride;
        let start_time = t0 + start as f64 * dt;
        let knots: Option<Vec<VoyageRecord>> = grid[start..=start + n].iter().copied().collect();
        let Some(knots) = knots else {
            out.dropped.push(DroppedWindow {
                window,
                start_time,
                reason: "data gap".into(),
            });
            continue;
        };
        match build_segment(window, start_time, &knots, env, dt) {
            Ok(seg) => out.segments.push(seg),
            Err(e) => out.dropped.push(DroppedWindow {
                window,
                start_time,
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

fn slice_env(env: &EnvironmentSeries, start: f64, end: f64) -> EnvironmentSeries {
    let samples = env.samples();
    let first = samples
        .partition_point(|(t, _)| *t <= start)
        .saturating_sub(1);
    let last = samples.partition_point(|(t, _)| *t <= end).max(first + 1);
    let kept = samples[first..last]
        .iter()
        .map(|(t, s)| (t - start, *s))
        .collect();
    EnvironmentSeries::new(kept).expect("slice of a valid series")
}

fn build_segment(
    window: usize,
    start_time: f64,
    knots: &[VoyageRecord],
    env: &EnvironmentSeries,
    dt: f64,
) -> Result<ValidationSegment, VoyageError> {
    let anchor = knots[0].position();
    let xy = project_to_local(knots, anchor)?;
    let env = slice_env(env, start_time, start_time + (knots.len() - 1) as f64 * dt);
    let mut records = Vec::with_capacity(knots.len());
    let mut controls = Vec::with_capacity(knots.len());
    for (k, (rec, (x, y))) in knots.iter().zip(xy).enumerate() {
        let t = k as f64 * dt;
        let (gu, gv) = earth_to_body(rec.ground_velocity(), rec.heading);
        let ground = GroundVelocity { u: gu, v: gv };
        let (u, v) = water_velocities(rec.heading, ground, env.sample_at(t).current);
        let control = ControlInput {
            rudder: rec.rudder,
            n: rec.rpm / 60.0,
        };
        controls.push((t, control));
        records.push(SimulationRecord {
            t,
            state: ShipState {
                x,
                y,
                psi: rec.heading,
                u,
                v,
                r: rec.yaw_rate,
            },
            ground,
            control,
            ..Default::default()
        });
    }
    let initial = records[0].state;
    Ok(ValidationSegment {
        window,
        start_time,
        anchor,
        truth: Trajectory::new(records, dt),
        controls: ControlSeries::new(controls).expect("increasing knot times"),
        env,
        initial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::EnvironmentSample;
    use approx::assert_abs_diff_eq;

    const T0: f64 = 1_700_000_000.0;

    fn straight(seconds: usize) -> Vec<VoyageRecord> {
        (0..=seconds)
            .map(|k| VoyageRecord {
                t: T0 + k as f64,
                lat: 57.0 + (5.0 * k as f64 / R_EARTH).to_degrees(),
                lon: 11.0,
                sog: 5.0,
                rpm: 100.0,
                ..Default::default()
            })
            .collect()
    }

    fn write(dir: &tempfile::TempDir, body: &str) -> std::path::PathBuf {
        let p = dir.path().join("v.csv");
        std::fs::write(&p, format!("{}\n{body}", VOYAGE_COLUMNS.join(","))).unwrap();
        p
    }

    #[test]
    fn loads_minimal_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "2023-05-01T10:00:00Z,57.0,11.0,90,5,90,6,10,100\n2023-05-01T10:00:01Z,57.0,11.0001,90,5,90,6,10,100\n",
        );
        let recs = load_voyage(&p).unwrap();
        assert_eq!(recs.len(), 2);
        assert_abs_diff_eq!(
            recs[0].heading,
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(recs[0].yaw_rate, 0.1f64.to_radians(), epsilon = 1e-15);
        assert_eq!(recs[1].t - recs[0].t, 1.0);
    }

    #[test]
    fn bounds_and_order_errors_name_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "2023-05-01T10:00:00Z,57,11,0,5,0,0,0,100\n2023-05-01T10:00:01Z,95,11,0,5,0,0,0,100\n",
        );
        let msg = load_voyage(&p).unwrap_err().to_string();
        assert!(msg.contains("row 2") && msg.contains("lat_deg"), "{msg}");

        let p = write(
            &dir,
            "2023-05-01T10:00:01Z,57,11,0,5,0,0,0,100\n2023-05-01T10:00:00Z,57,11,0,5,0,0,0,100\n",
        );
        assert!(load_voyage(&p)
            .unwrap_err()
            .to_string()
            .contains("increasing"));

        let p = write(
            &dir,
            "2023-05-01T10:00:00Z,57,11,0,5,0,0,0,100\n2023-05-01T10:00:00Z,57,11,0,5,0,0,0,100\n",
        );
        assert!(load_voyage(&p)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));

        let p = write(&dir, "2023-05-01T10:00:00Z,57,180,0,5,0,0,0,100\n");
        assert!(load_voyage(&p).unwrap_err().to_string().contains("lon_deg"));
        let p = write(&dir, "2023-05-01T10:00:00Z,57,11,0,5,0,0,46,100\n");
        assert!(load_voyage(&p)
            .unwrap_err()
            .to_string()
            .contains("rudder_deg"));
        let p = write(&dir, "2023-05-01T10:00:00Z,57,11,0,5,0,0,0,-1\n");
        assert!(load_voyage(&p).unwrap_err().to_string().contains("rpm"));
    }

    #[test]
    fn csv_round_trip() {
        let recs: Vec<_> = straight(10)
            .into_iter()
            .map(|r| VoyageRecord {
                heading: -0.5,
                cog: -0.4,
                yaw_rate: 0.001,
                rudder: -0.2,
                ..r
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        write_voyage(&recs, &p).unwrap();
        let back = load_voyage(&p).unwrap();
        for (a, b) in back.iter().zip(&recs) {
            assert_abs_diff_eq!(a.t, b.t, epsilon = 1e-6);
            assert_abs_diff_eq!(a.lat, b.lat, epsilon = 1e-10);
            assert_abs_diff_eq!(a.heading, b.heading, epsilon = 1e-7);
            assert_abs_diff_eq!(a.yaw_rate, b.yaw_rate, epsilon = 1e-12);
            assert_abs_diff_eq!(a.rudder, b.rudder, epsilon = 1e-9);
        }
    }

    #[test]
    fn projection_examples() {
        let a = GeoPoint {
            lat: 57.0,
            lon: 11.0,
        };
        assert_eq!(project_point(a, a), (0.0, 0.0));
        let (x, y) = project_point(GeoPoint { lat: 57.001, ..a }, a);
        assert_abs_diff_eq!(x, R_EARTH * 0.001f64.to_radians(), epsilon = 1e-6);
        assert_abs_diff_eq!(x, 111.19, epsilon = 0.01);
        assert_eq!(y, 0.0);
        let far = VoyageRecord {
            lat: 57.0 + (60_000.0 / R_EARTH).to_degrees(),
            lon: 11.0,
            ..Default::default()
        };
        assert!(matches!(
            project_to_local(&[far], a),
            Err(VoyageError::OutOfRange { .. })
        ));
        let p = unproject_point(300.0, -450.0, a);
        let (x, y) = project_point(p, a);
        assert_abs_diff_eq!(x, 300.0, epsilon = 1e-8);
        assert_abs_diff_eq!(y, -450.0, epsilon = 1e-8);
    }

    #[test]
    fn projection_across_antimeridian() {
        let a = GeoPoint {
            lat: 0.0,
            lon: 179.9999,
        };
        let (_, y) = project_point(
            GeoPoint {
                lat: 0.0,
                lon: -179.9999,
            },
            a,
        );
        assert_abs_diff_eq!(y, R_EARTH * 0.0002f64.to_radians(), epsilon = 1e-6);
    }

    #[test]
    fn resample_interpolates_and_holds() {
        let mut recs = straight(4);
        recs.remove(2);
        recs[2].rudder = 0.3;
        recs[1].heading = 3.1;
        recs[2].heading = -3.1;
        let grid = resample(&recs, 1.0);
        assert_eq!(grid.len(), 5);
        let mid = grid[2].unwrap();
        assert_eq!(mid.rudder, recs[1].rudder);
        assert_abs_diff_eq!(mid.heading.abs(), std::f64::consts::PI, epsilon = 1e-12);
        assert_abs_diff_eq!(mid.lat, (recs[1].lat + recs[2].lat) / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn clean_241_seconds_gives_two_segments() {
        let seg = segment_voyage(
            &straight(240),
            &EnvironmentSeries::calm(),
            SegmentOptions::default(),
        )
        .unwrap();
        assert_eq!(seg.segments.len(), 2);
        assert!(seg.dropped.is_empty());
        for s in &seg.segments {
            assert_eq!(s.truth.len(), 121);
            assert_eq!(s.truth.first().state, s.initial);
            assert_eq!(s.initial.x, 0.0);
        }
        assert_abs_diff_eq!(seg.segments[1].truth.last().state.x, 600.0, epsilon = 1e-6);
        assert_eq!(seg.segments[1].start_time, T0 + 120.0);
    }

    #[test]
    fn gap_drops_only_its_window() {
        let mut recs = straight(360);
        recs.retain(|r| !(150.0..155.0).contains(&(r.t - T0)));
        let seg =
            segment_voyage(&recs, &EnvironmentSeries::calm(), SegmentOptions::default()).unwrap();
        assert_eq!(
            seg.segments.iter().map(|s| s.window).collect::<Vec<_>>(),
            vec![0, 2]
        );
        assert_eq!(seg.dropped.len(), 1);
        assert_eq!(seg.dropped[0].window, 1);
    }

    #[test]
    fn stw_recovered_through_current() {
        let cur = EnvironmentSample::from_met(0.0, 0.0, 0.0, 0.0, 1.0, 90.0);
        let env = EnvironmentSeries::new(vec![(T0 - 10.0, cur)]).unwrap();
        let seg = segment_voyage(&straight(120), &env, SegmentOptions::default()).unwrap();
        let s = seg.segments[0].initial;
        assert_abs_diff_eq!(s.u, 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.v, -1.0, epsilon = 1e-12);
        let env0 = seg.segments[0].env.samples();
        assert_eq!(env0[0].0, -10.0);

        let calm = segment_voyage(
            &straight(120),
            &EnvironmentSeries::calm(),
            SegmentOptions::default(),
        )
        .unwrap();
        let s = calm.segments[0].initial;
        assert_eq!((s.u, s.v), (5.0, 0.0));
    }

    #[test]
    fn overlapping_stride() {
        let opts = SegmentOptions {
            stride: 60,
            ..Default::default()
        };
        let seg = segment_voyage(&straight(240), &EnvironmentSeries::calm(), opts).unwrap();
        assert_eq!(seg.segments.len(), 3);
    }
}
