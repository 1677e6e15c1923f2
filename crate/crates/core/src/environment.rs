//! Wind, wave and sea-current conditions and their time series.
//!
//! Wind and current are stored as earth-frame flow vectors (the direction the
//! air or water moves toward). Meteorological "coming from" directions are
//! converted once, when weather files are read.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::ShipState;
use crate::geometry::{body_to_earth, earth_to_body, wrap_two_pi, EarthVector};
use crate::textio::{csv_line, format_timestamp, CsvError, CsvTable};

#[derive(Debug, Error)]
pub enum EnvironmentError {
    #[error("environment series is empty")]
    Empty,
    #[error("environment timestamps must be strictly increasing (sample {index})")]
    NotIncreasing { index: usize },
    #[error("environment sample {index} is invalid: {reason}")]
    InvalidSample { index: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] CsvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSample {
    /// True wind flow vector, m/s.
    pub true_wind: EarthVector,
    /// Significant wave height H_W1/3, m.
    pub wave_height: f64,
    /// Direction the waves come from, rad clockwise from north.
    pub wave_direction: f64,
    /// Sea-current flow vector s_sc, m/s.
    pub current: EarthVector,
}

impl Default for EnvironmentSample {
    fn default() -> Self {
        Self::calm()
    }
}

impl EnvironmentSample {
    pub fn calm() -> Self {
        Self {
            true_wind: EarthVector::ZERO,
            wave_height: 0.0,
            wave_direction: 0.0,
            current: EarthVector::ZERO,
        }
    }

    /// Builds a sample from meteorological conventions (wind and waves "from",
    /// current "toward"), speeds in m/s and directions in degrees.
    pub fn from_met(
        wind_speed: f64,
        wind_from_deg: f64,
        wave_height: f64,
        wave_from_deg: f64,
        current_speed: f64,
        current_to_deg: f64,
    ) -> Self {
        Self {
            true_wind: EarthVector::from_bearing(wind_speed, wind_from_deg.to_radians() + PI),
            wave_height,
            wave_direction: wrap_two_pi(wave_from_deg.to_radians()),
            current: EarthVector::from_bearing(current_speed, current_to_deg.to_radians()),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !self.true_wind.is_finite() || !self.current.is_finite() {
            return Err("wind and current must be finite".into());
        }
        if !self.wave_direction.is_finite() {
            return Err("wave direction must be finite".into());
        }
        if !(self.wave_height.is_finite() && self.wave_height >= 0.0) {
            return Err(format!(
                "wave height must be >= 0, got {}",
                self.wave_height
            ));
        }
        Ok(())
    }

    /// Same conditions with every direction turned clockwise by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            true_wind: self.true_wind.rotated(angle),
            wave_height: self.wave_height,
            wave_direction: wrap_two_pi(self.wave_direction + angle),
            current: self.current.rotated(angle),
        }
    }
}

/// Time-sorted environment samples, sampled with a zero-order hold.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSeries {
    samples: Vec<(f64, EnvironmentSample)>,
}

impl EnvironmentSeries {
    pub fn new(samples: Vec<(f64, EnvironmentSample)>) -> Result<Self, EnvironmentError> {
        if samples.is_empty() {
            return Err(EnvironmentError::Empty);
        }
        for (i, (t, s)) in samples.iter().enumerate() {
            if !t.is_finite() {
                return Err(EnvironmentError::InvalidSample {
                    index: i,
                    reason: "timestamp must be finite".into(),
                });
            }
            if i > 0 && *t <= samples[i - 1].0 {
                return Err(EnvironmentError::NotIncreasing { index: i });
            }
            s.validate()
                .map_err(|reason| EnvironmentError::InvalidSample { index: i, reason })?;
        }
        Ok(Self { samples })
    }

    /// A single sample held for all time.
    pub fn constant(sample: EnvironmentSample) -> Self {
        Self {
            samples: vec![(0.0, sample)],
        }
    }

    pub fn calm() -> Self {
        Self::constant(EnvironmentSample::calm())
    }

    pub fn samples(&self) -> &[(f64, EnvironmentSample)] {
        &self.samples
    }

    /// Latest sample at or before `t`; the first sample for `t` before the series start.
    pub fn sample_at(&self, t: f64) -> EnvironmentSample {
        let idx = self.samples.partition_point(|(ts, _)| *ts <= t);
        self.samples[idx.saturating_sub(1)].1
    }

    /// Series with every timestamp shifted by `-origin`.
    pub fn shifted(&self, origin: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|(t, s)| (t - origin, *s)).collect(),
        }
    }

    pub fn rotated(&self, angle: f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|(t, s)| (*t, s.rotated(angle)))
                .collect(),
        }
    }
}

/// Free-function form of [`EnvironmentSeries::sample_at`].
pub fn sample_at(series: &EnvironmentSeries, t: f64) -> EnvironmentSample {
    series.sample_at(t)
}

/// Wind as felt on board.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApparentWind {
    /// U_wind, m/s
    pub speed: f64,
    /// ψ_wind: direction the wind comes from relative to the bow, rad in
    /// `[0, 2π)`, 0 = head wind, positive toward starboard.
    pub angle: f64,
}

/// Apparent wind for a ship whose ground velocity is its through-water
/// velocity plus `current`.
pub fn apparent_wind(
    true_wind: EarthVector,
    state: &ShipState,
    current: EarthVector,
) -> ApparentWind {
    let ground = body_to_earth(state.u, state.v, state.psi) + current;
    apparent_wind_over_ground(true_wind, ground, state.psi)
}

/// Apparent wind given the ship's earth-frame ground velocity and heading.
pub fn apparent_wind_over_ground(
    true_wind: EarthVector,
    ground: EarthVector,
    psi: f64,
) -> ApparentWind {
    let rel = true_wind - ground;
    let (along, across) = earth_to_body(rel, psi);
    let speed = along.hypot(across);
    let angle = if speed == 0.0 {
        0.0
    } else {
        // the flow moves along (along, across); it comes from the opposite side
        wrap_two_pi((-across).atan2(-along))
    };
    ApparentWind { speed, angle }
}

pub const WEATHER_COLUMNS: [&str; 7] = [
    "timestamp_iso8601",
    "wind_speed_mps",
    "wind_dir_from_deg",
    "hs_m",
    "wave_dir_from_deg",
    "current_speed_mps",
    "current_dir_to_deg",
];

/// Reads a hindcast weather CSV. Timestamps become seconds since the Unix epoch.
pub fn load_weather(path: impl AsRef<Path>) -> Result<EnvironmentSeries, EnvironmentError> {
    let table = CsvTable::read(path.as_ref())?;
    table.require(&WEATHER_COLUMNS)?;
    let mut samples = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let t = table.time_field(row, "timestamp_iso8601")?;
        let wind = table.f64_field(row, "wind_speed_mps")?;
        let wind_dir = table.f64_field(row, "wind_dir_from_deg")?;
        let hs = table.f64_field(row, "hs_m")?;
        let wave_dir = table.f64_field(row, "wave_dir_from_deg")?;
        let cur = table.f64_field(row, "current_speed_mps")?;
        let cur_dir = table.f64_field(row, "current_dir_to_deg")?;
        for (col, v) in [
            ("wind_speed_mps", wind),
            ("hs_m", hs),
            ("current_speed_mps", cur),
        ] {
            if v < 0.0 {
                return Err(table.field_err(row, col, "must be >= 0").into());
            }
        }
        if let Some((prev, _)) = samples.last() {
            if t <= *prev {
                return Err(table
                    .row_err(row, "timestamps must be strictly increasing")
                    .into());
            }
        }
        samples.push((
            t,
            EnvironmentSample::from_met(wind, wind_dir, hs, wave_dir, cur, cur_dir),
        ));
    }
    EnvironmentSeries::new(samples)
}

/// Weather CSV text for `series`, whose times are epoch seconds.
pub fn weather_csv_string(series: &EnvironmentSeries) -> String {
    let mut out = WEATHER_COLUMNS.join(",");
    out.push('\n');
    let bearing = |v: EarthVector| wrap_two_pi(v.east.atan2(v.north)).to_degrees();
    for (t, s) in series.samples() {
        let wind_from = if s.true_wind.norm() == 0.0 {
            0.0
        } else {
            bearing(EarthVector::ZERO - s.true_wind)
        };
        let cur_to = if s.current.norm() == 0.0 {
            0.0
        } else {
            bearing(s.current)
        };
        out.push_str(&format_timestamp(*t));
        out.push(',');
        out.push_str(&csv_line([
            s.true_wind.norm(),
            wind_from,
            s.wave_height,
            s.wave_direction.to_degrees(),
            s.current.norm(),
            cur_to,
        ]));
        out.push('\n');
    }
    out
}

pub fn write_weather(series: &EnvironmentSeries, path: impl AsRef<Path>) -> std::io::Result<()> {
    std::fs::write(path, weather_csv_string(series))
}
