//! Sampled coefficient curves indexed by angle.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::wrap_two_pi;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("coefficient table is empty")]
    Empty,
    #[error("coefficient table knot {index} is not finite")]
    NonFinite { index: usize },
    #[error("coefficient table angles must be strictly increasing (knot {index})")]
    NotIncreasing { index: usize },
    #[error("periodic table angle {angle_deg} deg outside [0, 360)")]
    OutOfPeriod { angle_deg: f64 },
    #[error("query angle is not finite")]
    NonFiniteQuery,
}

/// How a curve is evaluated outside its knot span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extent {
    /// Hold the end values (rudder lift/drag).
    Clamped,
    /// Wrap over `[0, 2π)` (wind coefficients).
    Periodic,
}

/// Piecewise-linear curve over angle in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientCurve {
    knots: Vec<(f64, f64)>,
    extent: Extent,
}

impl CoefficientCurve {
    pub fn new(knots: Vec<(f64, f64)>, extent: Extent) -> Result<Self, TableError> {
        for (i, &(a, v)) in knots.iter().enumerate() {
            if !a.is_finite() || !v.is_finite() {
                return Err(TableError::NonFinite { index: i });
            }
            if i > 0 && a <= knots[i - 1].0 {
                return Err(TableError::NotIncreasing { index: i });
            }
            if extent == Extent::Periodic && !(0.0..TAU).contains(&a) {
                return Err(TableError::OutOfPeriod {
                    angle_deg: a.to_degrees(),
                });
            }
        }
        Ok(Self { knots, extent })
    }

    /// Builds a curve from `[angle_deg, value]` pairs.
    pub fn from_degrees(pairs: &[[f64; 2]], extent: Extent) -> Result<Self, TableError> {
        Self::new(
            pairs.iter().map(|p| (p[0].to_radians(), p[1])).collect(),
            extent,
        )
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn eval(&self, angle: f64) -> Result<f64, TableError> {
        lookup_coefficient(self, angle)
    }
}

fn lerp(a0: f64, v0: f64, a1: f64, v1: f64, a: f64) -> f64 {
    let t = (a - a0) / (a1 - a0);
    v0 + t * (v1 - v0)
}

/// Piecewise-linear interpolation of a coefficient curve at `angle` (rad).
///
/// Clamped curves hold their end values; periodic curves wrap the query into
/// `[0, 2π)` and interpolate across the seam between the last and first knot.
pub fn lookup_coefficient(curve: &CoefficientCurve, angle: f64) -> Result<f64, TableError> {
    let knots = &curve.knots;
    let (first, last) = match (knots.first(), knots.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(TableError::Empty),
    };
    if !angle.is_finite() {
        return Err(TableError::NonFiniteQuery);
    }
    if knots.len() == 1 {
        return Ok(first.1);
    }
    let a = match curve.extent {
        Extent::Clamped => {
            if angle <= first.0 {
                return Ok(first.1);
            }
            if angle >= last.0 {
                return Ok(last.1);
            }
            angle
        }
        Extent::Periodic => {
            let a = wrap_two_pi(angle);
            if a < first.0 {
                return Ok(lerp(last.0 - TAU, last.1, first.0, first.1, a));
            }
            if a >= last.0 {
                return Ok(lerp(last.0, last.1, first.0 + TAU, first.1, a));
            }
            a
        }
    };
    // first index whose angle exceeds `a`; guaranteed in 1..len
    let hi = knots.partition_point(|k| k.0 <= a);
    let (a0, v0) = knots[hi - 1];
    if a == a0 {
        return Ok(v0);
    }
    let (a1, v1) = knots[hi];
    Ok(lerp(a0, v0, a1, v1, a))
}

/// Symmetry used to expand a one-sided wind table over `[0°, 180°]` to the full circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// `C(360° - θ) = C(θ)`
    Even,
    /// `C(360° - θ) = -C(θ)`
    Odd,
}

/// An angle-indexed table as written in config files: `[angle_deg, value]` pairs.
///
/// The raw pairs are kept for serialization; evaluation goes through the
/// derived curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngleTable {
    pairs: Vec<[f64; 2]>,
}

impl PartialEq for AngleTable {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs
    }
}

impl AngleTable {
    pub fn new(pairs: Vec<[f64; 2]>) -> Self {
        Self { pairs }
    }

    pub fn pairs(&self) -> &[[f64; 2]] {
        &self.pairs
    }

    pub fn clamped_curve(&self) -> Result<CoefficientCurve, TableError> {
        CoefficientCurve::from_degrees(&self.pairs, Extent::Clamped)
    }

    /// Periodic curve, mirrored about head wind when the table stops at 180°.
    pub fn periodic_curve(&self, parity: Parity) -> Result<CoefficientCurve, TableError> {
        let max_deg = self
            .pairs
            .iter()
            .map(|p| p[0])
            .fold(f64::NEG_INFINITY, f64::max);
        if self.pairs.is_empty() || max_deg > 180.0 {
            return CoefficientCurve::from_degrees(&self.pairs, Extent::Periodic);
        }
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        let mut knots: Vec<(f64, f64)> = self
            .pairs
            .iter()
            .map(|p| (p[0].to_radians(), p[1]))
            .collect();
        let mirrored = self
            .pairs
            .iter()
            .rev()
            .filter(|p| p[0] > 0.0 && p[0] < 180.0)
            .map(|p| ((360.0 - p[0]).to_radians(), sign * p[1]));
        knots.extend(mirrored);
        CoefficientCurve::new(knots, Extent::Periodic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn quarter() -> CoefficientCurve {
        CoefficientCurve::new(vec![(0.0, 0.0), (FRAC_PI_2, 1.0)], Extent::Clamped).unwrap()
    }

    #[test]
    fn exact_knot_and_midpoint() {
        assert_eq!(lookup_coefficient(&quarter(), 0.0).unwrap(), 0.0);
        assert_eq!(lookup_coefficient(&quarter(), FRAC_PI_2).unwrap(), 1.0);
        assert!((lookup_coefficient(&quarter(), FRAC_PI_4).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clamped_holds_ends() {
        assert_eq!(lookup_coefficient(&quarter(), -1.0).unwrap(), 0.0);
        assert_eq!(lookup_coefficient(&quarter(), 3.0).unwrap(), 1.0);
    }

    #[test]
    fn empty_table_errors() {
        let c = CoefficientCurve::new(vec![], Extent::Clamped).unwrap();
        assert_eq!(lookup_coefficient(&c, 0.0), Err(TableError::Empty));
    }

    #[test]
    fn rejects_unsorted() {
        let r = CoefficientCurve::new(vec![(1.0, 0.0), (0.5, 1.0)], Extent::Clamped);
        assert_eq!(r, Err(TableError::NotIncreasing { index: 1 }));
    }

    #[test]
    fn periodic_wraps() {
        let t = AngleTable::new(vec![[0.0, -0.8], [90.0, 0.1], [180.0, 0.6]]);
        let c = t.periodic_curve(Parity::Even).unwrap();
        let wrapped = lookup_coefficient(&c, TAU + 0.1).unwrap();
        let direct = lookup_coefficient(&c, 0.1).unwrap();
        assert!((wrapped - direct).abs() < 1e-12);
    }

    #[test]
    fn periodic_seam_interpolates() {
        let c = CoefficientCurve::new(vec![(0.5, 1.0), (3.0, 3.0)], Extent::Periodic).unwrap();
        // halfway across the seam from 3.0 to 0.5 + 2π
        let mid = (3.0 + 0.5 + TAU) / 2.0;
        assert!((lookup_coefficient(&c, mid).unwrap() - 2.0).abs() < 1e-12);
        assert!((lookup_coefficient(&c, mid - TAU).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mirroring_parity() {
        let t = AngleTable::new(vec![[0.0, 0.0], [60.0, -0.7], [120.0, -0.5], [180.0, 0.0]]);
        let odd = t.periodic_curve(Parity::Odd).unwrap();
        let even = t.periodic_curve(Parity::Even).unwrap();
        for deg in [10.0_f64, 45.0, 60.0, 100.0, 170.0] {
            let a = deg.to_radians();
            let b = (360.0 - deg).to_radians();
            assert!((odd.eval(a).unwrap() + odd.eval(b).unwrap()).abs() < 1e-12);
            assert!((even.eval(a).unwrap() - even.eval(b).unwrap()).abs() < 1e-12);
        }
    }
}
