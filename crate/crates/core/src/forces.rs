//! External forces and moments: rudder, propeller, wind, waves and calm-water
//! resistance. Every function is pure in (vessel, state, inputs).

use std::f64::consts::FRAC_PI_4;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{RudderConfig, Vessel};
use crate::dynamics::{ControlInput, ShipState};
use crate::environment::{apparent_wind, ApparentWind, EnvironmentSample};
use crate::geometry::angle_diff;

pub const GRAVITY: f64 = 9.81;
/// Below this through-water speed the drift angle and advance ratio are taken as zero (m/s).
pub const U_EPS: f64 = 0.1;
/// Below this shaft rate the propeller produces nothing (rev/s).
pub const N_EPS: f64 = 0.01;
/// Hard rudder limit, rad.
pub const RUDDER_LIMIT: f64 = 45.0 * std::f64::consts::PI / 180.0;
/// Half-width of the head-seas sector where the wave correction applies, rad.
pub const WAVE_SECTOR: f64 = FRAC_PI_4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForceError {
    #[error("rudder angle {delta_deg:.3} deg exceeds the ±45 deg limit")]
    RudderLimit { delta_deg: f64 },
    #[error("propeller rate must be >= 0, got {n} rev/s")]
    NegativeRevs { n: f64 },
}

/// Surge force X (kN), sway force Y (kN) and yaw moment N (kN·m) about O_s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceTriplet {
    pub x: f64,
    pub y: f64,
    pub n: f64,
}

impl ForceTriplet {
    pub const ZERO: ForceTriplet = ForceTriplet {
        x: 0.0,
        y: 0.0,
        n: 0.0,
    };

    pub fn new(x: f64, y: f64, n: f64) -> Self {
        Self { x, y, n }
    }

    pub fn surge(x: f64) -> Self {
        Self { x, y: 0.0, n: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.n.is_finite()
    }
}

impl Add for ForceTriplet {
    type Output = ForceTriplet;
    fn add(self, o: Self) -> Self {
        ForceTriplet::new(self.x + o.x, self.y + o.y, self.n + o.n)
    }
}

impl AddAssign for ForceTriplet {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Effective inflow at the rudder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RudderInflow {
    /// a_R, rad
    pub angle: f64,
    /// U_R, m/s
    pub speed: f64,
}

/// Effective rudder inflow angle and speed.
///
/// `a_R = δ − γ_R·β_R` with the local drift `β_R = atan((−v + r·x_R) / max(u, U_ε))`,
/// and `U_R = k_prop·u·(1 − w_p)`. Both forms are substitutes for the
/// propeller-race model and can be swapped without touching the force law.
pub fn rudder_inflow(vessel: &Vessel, state: &ShipState, delta: f64) -> RudderInflow {
    let cfg = vessel.config();
    let rud = &cfg.rudder;
    let beta_r = ((-state.v + state.r * rud.x_r) / state.u.max(U_EPS)).atan();
    RudderInflow {
        angle: delta - rud.gamma_r * beta_r,
        speed: rud.k_prop * state.u * (1.0 - cfg.propeller.w_p),
    }
}

/// Rudder force law given inflow and the lift/drag coefficients at `a_R`.
pub fn rudder_triplet(
    rudder: &RudderConfig,
    rho: f64,
    delta: f64,
    inflow: RudderInflow,
    c_l: f64,
    c_d: f64,
) -> ForceTriplet {
    let q = 0.5 * rho * rudder.area * inflow.speed * inflow.speed / 1000.0;
    let lift = q * c_l;
    let drag = q * c_d;
    let f_n = lift * inflow.angle.cos() + drag * inflow.angle.sin();
    let (sd, cd) = delta.sin_cos();
    ForceTriplet {
        x: -(1.0 - rudder.t_r) * f_n * sd,
        y: -(1.0 + rudder.a_h) * f_n * cd,
        n: -(1.0 + rudder.a_h) * rudder.x_r * f_n * cd,
    }
}

/// Rudder force triplet for rudder angle `delta` (rad, positive to starboard).
///
/// `_n` is the shaft rate; the current inflow model does not use it.
pub fn rudder_forces(
    vessel: &Vessel,
    state: &ShipState,
    delta: f64,
    _n: f64,
) -> Result<ForceTriplet, ForceError> {
    if !(delta.abs() <= RUDDER_LIMIT) {
        return Err(ForceError::RudderLimit {
            delta_deg: delta.to_degrees(),
        });
    }
    let inflow = rudder_inflow(vessel, state, delta);
    if inflow.speed == 0.0 {
        return Ok(ForceTriplet::ZERO);
    }
    let c_l = vessel.lift.eval(inflow.angle).expect("validated table");
    let c_d = vessel.drag.eval(inflow.angle).expect("validated table");
    let cfg = vessel.config();
    Ok(rudder_triplet(
        &cfg.rudder,
        cfg.hull.rho,
        delta,
        inflow,
        c_l,
        c_d,
    ))
}

/// Advance ratio `J = U·cos β·(1 − w_p)/(n·D)` with `β = atan(−v/U)`.
///
/// Zero below the speed guard; callers must handle `n < N_EPS` first.
pub fn advance_ratio(vessel: &Vessel, state: &ShipState, n: f64) -> f64 {
    let prop = &vessel.config().propeller;
    let speed = state.speed();
    if speed < U_EPS {
        return 0.0;
    }
    let beta = (-state.v / speed).atan();
    speed * beta.cos() * (1.0 - prop.w_p) / (n * prop.diameter)
}

fn check_revs(n: f64) -> Result<(), ForceError> {
    if n >= 0.0 {
        Ok(())
    } else {
        Err(ForceError::NegativeRevs { n })
    }
}

/// Propeller thrust X_thr in kN for shaft rate `n` (rev/s).
pub fn propeller_thrust(vessel: &Vessel, state: &ShipState, n: f64) -> Result<f64, ForceError> {
    check_revs(n)?;
    if n < N_EPS {
        return Ok(0.0);
    }
    let cfg = vessel.config();
    let prop = &cfg.propeller;
    let j = advance_ratio(vessel, state, n);
    Ok((1.0 - prop.t_p) * cfg.hull.rho * n * n * prop.diameter.powi(4) * prop.k_t.eval(j) / 1000.0)
}

/// Propeller torque Q_prop in kN·m for shaft rate `n` (rev/s).
pub fn propeller_torque(vessel: &Vessel, state: &ShipState, n: f64) -> Result<f64, ForceError> {
    check_revs(n)?;
    if n < N_EPS {
        return Ok(0.0);
    }
    let cfg = vessel.config();
    let prop = &cfg.propeller;
    let j = advance_ratio(vessel, state, n);
    Ok(cfg.hull.rho * n * n * prop.diameter.powi(5) * prop.k_q.eval(j) / 1000.0)
}

/// Wind loads from the apparent wind.
pub fn wind_forces(vessel: &Vessel, aw: ApparentWind) -> ForceTriplet {
    let w = &vessel.config().windage;
    let q = 0.5 * w.rho_air * aw.speed * aw.speed / 1000.0;
    let c_x = vessel.c_x.eval(aw.angle).expect("validated table");
    let c_y = vessel.c_y.eval(aw.angle).expect("validated table");
    let c_n = vessel.c_n.eval(aw.angle).expect("validated table");
    ForceTriplet {
        x: c_x * q * w.a_f,
        y: c_y * q * w.a_l,
        n: c_n * q * w.a_l * w.l_oa,
    }
}

/// Added resistance in waves, applied as negative surge force within ±45°
/// of head seas and exactly zero outside that sector.
pub fn wave_force(vessel: &Vessel, state: &ShipState, env: &EnvironmentSample) -> ForceTriplet {
    let off_bow = angle_diff(env.wave_direction, state.psi);
    if off_bow.abs() > WAVE_SECTOR || env.wave_height == 0.0 {
        return ForceTriplet::ZERO;
    }
    let hull = &vessel.config().hull;
    let h = env.wave_height;
    let magnitude = hull.rho * GRAVITY * h * h * hull.breadth * (hull.breadth / hull.l_bwl).sqrt()
        / 16.0
        / 1000.0;
    ForceTriplet::surge(-magnitude)
}

/// Calm-water resistance R(|u|) in kN (non-negative).
pub fn hull_resistance(vessel: &Vessel, u: f64) -> f64 {
    vessel.config().hull.resistance.eval(u.abs())
}

/// Resistance contribution to ΣX: opposes the surge velocity.
pub fn resistance_surge_force(vessel: &Vessel, u: f64) -> f64 {
    let r = hull_resistance(vessel, u);
    if u < 0.0 {
        r
    } else {
        -r
    }
}

/// Per-source forces at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ForceBreakdown {
    pub rudder: ForceTriplet,
    /// X_thr, kN
    pub thrust: f64,
    pub wind: ForceTriplet,
    pub wave: ForceTriplet,
    /// −sign(u)·R(|u|), kN
    pub resistance: f64,
}

impl ForceBreakdown {
    /// (ΣX, ΣY, ΣN)
    pub fn total(&self) -> ForceTriplet {
        let mut t = self.rudder;
        t += ForceTriplet::surge(self.thrust);
        t += self.wind;
        t += self.wave;
        t += ForceTriplet::surge(self.resistance);
        t
    }

    /// Name of the first sub-model with a non-finite output, if any.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        if !self.rudder.is_finite() {
            Some("rudder")
        } else if !self.thrust.is_finite() {
            Some("propeller")
        } else if !self.wind.is_finite() {
            Some("wind")
        } else if !self.wave.is_finite() {
            Some("wave")
        } else if !self.resistance.is_finite() {
            Some("resistance")
        } else {
            None
        }
    }
}

/// Every external force on the hull for the given state, controls and weather.
pub fn total_external_forces(
    vessel: &Vessel,
    state: &ShipState,
    control: &ControlInput,
    env: &EnvironmentSample,
) -> Result<ForceBreakdown, ForceError> {
    let aw = apparent_wind(env.true_wind, state, env.current);
    Ok(ForceBreakdown {
        rudder: rudder_forces(vessel, state, control.rudder, control.n)?,
        thrust: propeller_thrust(vessel, state, control.n)?,
        wind: wind_forces(vessel, aw),
        wave: wave_force(vessel, state, env),
        resistance: resistance_surge_force(vessel, state.u),
    })
}
