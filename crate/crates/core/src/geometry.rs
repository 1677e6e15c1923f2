//! Frame conventions and angle helpers.
//!
//! The earth frame is north-east-down: `x` points north, `y` points east and
//! headings are measured clockwise from north. The body frame has `x` toward
//! the bow and `y` toward starboard.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// A horizontal vector in the earth frame (north, east components).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EarthVector {
    pub north: f64,
    pub east: f64,
}

impl EarthVector {
    pub const ZERO: EarthVector = EarthVector {
        north: 0.0,
        east: 0.0,
    };

    pub fn new(north: f64, east: f64) -> Self {
        Self { north, east }
    }

    /// Vector of length `speed` pointing toward the compass bearing `bearing` (rad).
    pub fn from_bearing(speed: f64, bearing: f64) -> Self {
        Self {
            north: speed * bearing.cos(),
            east: speed * bearing.sin(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.north.hypot(self.east)
    }

    pub fn is_finite(&self) -> bool {
        self.north.is_finite() && self.east.is_finite()
    }

    /// Rotates the vector clockwise (toward east) by `angle`.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            north: c * self.north - s * self.east,
            east: s * self.north + c * self.east,
        }
    }
}

impl std::ops::Sub for EarthVector {
    type Output = EarthVector;
    fn sub(self, rhs: Self) -> Self {
        EarthVector::new(self.north - rhs.north, self.east - rhs.east)
    }
}

impl std::ops::Add for EarthVector {
    type Output = EarthVector;
    fn add(self, rhs: Self) -> Self {
        EarthVector::new(self.north + rhs.north, self.east + rhs.east)
    }
}

/// Earth-frame vector expressed in body axes for heading `psi`: `(surge, sway)`.
pub fn earth_to_body(v: EarthVector, psi: f64) -> (f64, f64) {
    let (s, c) = psi.sin_cos();
    (c * v.north + s * v.east, -s * v.north + c * v.east)
}

/// Body-frame `(surge, sway)` components expressed in the earth frame.
pub fn body_to_earth(surge: f64, sway: f64, psi: f64) -> EarthVector {
    let (s, c) = psi.sin_cos();
    EarthVector::new(surge * c - sway * s, surge * s + sway * c)
}

/// Wraps an angle to `[-π, π)`.
pub fn wrap_pi(angle: f64) -> f64 {
    let w = angle - TAU * ((angle + PI) / TAU).floor();
    // floor rounding can land exactly on +π for inputs just below it
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

/// Wraps an angle to `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Shortest signed angular difference `a - b`, in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = wrap_pi(a - b);
    if d == -PI {
        PI
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wrap_ranges() {
        assert_eq!(wrap_pi(PI), -PI);
        assert_eq!(wrap_pi(-PI), -PI);
        assert_abs_diff_eq!(wrap_pi(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_two_pi(-0.1), TAU - 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_two_pi(TAU + 0.1), 0.1, epsilon = 1e-15);
        assert_eq!(angle_diff(0.0, PI), PI);
        assert_eq!(angle_diff(PI, 0.0), PI);
        assert_abs_diff_eq!(angle_diff(0.1, TAU - 0.1), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn body_earth_roundtrip() {
        let v = EarthVector::new(1.5, -2.0);
        let (a, b) = earth_to_body(v, 0.7);
        let back = body_to_earth(a, b, 0.7);
        assert_abs_diff_eq!(back.north, v.north, epsilon = 1e-14);
        assert_abs_diff_eq!(back.east, v.east, epsilon = 1e-14);
    }

    #[test]
    fn heading_east_sees_east_current_as_surge() {
        let (u, v) = earth_to_body(EarthVector::new(0.0, 1.0), PI / 2.0);
        assert_abs_diff_eq!(u, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
    }
}
