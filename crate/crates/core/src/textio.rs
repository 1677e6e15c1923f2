//! CSV and number formatting shared by the file readers and writers.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, SecondsFormat, Utc};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error("{path}: row {row}, column `{column}`: {message}")]
    Field {
        path: String,
        row: usize,
        column: String,
        message: String,
    },
    #[error("{path}: row {row}: {message}")]
    Row {
        path: String,
        row: usize,
        message: String,
    },
}

/// Formats `x` with 9 significant digits, decimal point, no grouping.
pub fn fmt_sig9(x: f64) -> String {
    fmt_sig(x, 9)
}

pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Rounds to 9 significant digits (the value that `fmt_sig9` prints).
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.8e}", x).parse().expect("round trip")
}

/// Parses an ISO-8601 timestamp into seconds since the Unix epoch.
///
/// Accepts RFC 3339 with offset, or a naive date-time taken as UTC.
pub fn parse_timestamp(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let dt: DateTime<Utc> = match DateTime::parse_from_rfc3339(s) {
        Ok(dt) => dt.with_timezone(&Utc),
        Err(_) => {
            let naive = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
                .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f"))
                .map_err(|e| format!("invalid ISO-8601 timestamp `{s}`: {e}"))?;
            naive.and_utc()
        }
    };
    Ok(dt.timestamp() as f64 + f64::from(dt.timestamp_subsec_nanos()) * 1e-9)
}

/// Formats epoch seconds as RFC 3339 UTC with millisecond precision.
pub fn format_timestamp(t: f64) -> String {
    let ms = (t * 1000.0).round() as i64;
    DateTime::<Utc>::from_timestamp_millis(ms)
        .map(|d| d.to_rfc3339_opts(SecondsFormat::Millis, true))
        .unwrap_or_else(|| format!("{t}"))
}

/// A CSV table read fully into memory with a header lookup.
pub(crate) struct CsvTable {
    pub path: String,
    index: HashMap<String, usize>,
    pub rows: Vec<csv::StringRecord>,
}

impl CsvTable {
    pub fn read(path: &Path) -> Result<Self, CsvError> {
        let name = path.display().to_string();
        let io = |e: csv::Error| CsvError::Io {
            path: name.clone(),
            message: e.to_string(),
        };
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(io)?;
        let headers = rdr.headers().map_err(io)?.clone();
        let index = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        let rows = rdr.records().collect::<Result<Vec<_>, _>>().map_err(io)?;
        Ok(Self {
            path: name,
            index,
            rows,
        })
    }

    pub fn require(&self, columns: &[&str]) -> Result<(), CsvError> {
        for c in columns {
            if !self.index.contains_key(*c) {
                return Err(CsvError::MissingColumn {
                    path: self.path.clone(),
                    column: c.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn f64_field(&self, row: usize, column: &str) -> Result<f64, CsvError> {
        let rec = &self.rows[row];
        let raw = rec
            .get(self.index[column])
            .ok_or_else(|| self.field_err(row, column, "missing value"))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| self.field_err(row, column, format!("not a number: `{raw}`")))?;
        if !v.is_finite() {
            return Err(self.field_err(row, column, "value must be finite"));
        }
        Ok(v)
    }

    pub fn time_field(&self, row: usize, column: &str) -> Result<f64, CsvError> {
        let rec = &self.rows[row];
        let raw = rec
            .get(self.index[column])
            .ok_or_else(|| self.field_err(row, column, "missing value"))?;
        parse_timestamp(raw).map_err(|m| self.field_err(row, column, m))
    }

    pub fn field_err(&self, row: usize, column: &str, message: impl Into<String>) -> CsvError {
        CsvError::Field {
            path: self.path.clone(),
            row: row + 1,
            column: column.to_string(),
            message: message.into(),
        }
    }

    pub fn row_err(&self, row: usize, message: impl Into<String>) -> CsvError {
        CsvError::Row {
            path: self.path.clone(),
            row: row + 1,
            message: message.into(),
        }
    }
}

/// Joins formatted values into one CSV line (no quoting needed for numbers).
pub(crate) fn csv_line(values: impl IntoIterator<Item = f64>) -> String {
    let mut line = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        let _ = write!(line, "{}", fmt_sig9(v));
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(-9.8), "-9.8");
        assert_eq!(fmt_sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_sig9(123456.789012), "123456.789");
        assert_eq!(fmt_sig9(0.000123456789123), "0.000123456789");
        assert_eq!(fmt_sig9(1.5e-9), "1.5e-9");
        assert_eq!(fmt_sig9(2.0e20), "2e20");
        assert_eq!(fmt_sig9(999999999.6), "1000000000");
    }

    #[test]
    fn rounding_matches_printing() {
        for x in [
            std::f64::consts::E,
            -1234.56789123,
            6.02214076e23,
            1e-7 / 3.0,
        ] {
            assert_eq!(round_sig9(x), fmt_sig9(x).parse::<f64>().unwrap());
        }
    }

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("1970-01-01T00:01:00Z").unwrap(), 60.0);
        assert_eq!(parse_timestamp("1970-01-01T01:00:00+01:00").unwrap(), 0.0);
        assert_eq!(parse_timestamp("1970-01-01T00:00:01.5").unwrap(), 1.5);
        assert_eq!(parse_timestamp("1970-01-01 00:00:02").unwrap(), 2.0);
        assert!(parse_timestamp("yesterday").is_err());
        assert_eq!(format_timestamp(61.25), "1970-01-01T00:01:01.250Z");
    }
}
