//! Equations of motion and their time integration.
//!
//! The body-frame accelerations come from the 3-DoF hydrodynamic-derivative
//! model; the earth-frame pose is advanced with the over-ground velocities,
//! which differ from the through-water velocities by the sea current.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Vessel, VesselConfig, DET_EPS};
use crate::environment::{EnvironmentSample, EnvironmentSeries};
use crate::forces::{total_external_forces, ForceBreakdown, ForceError, ForceTriplet, U_EPS};
use crate::geometry::{body_to_earth, earth_to_body, wrap_pi, EarthVector};
use crate::trajectory::{SimulationRecord, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("time step must be > 0, got {0}")]
    InvalidTimeStep(f64),
    #[error("number of steps must be >= 1")]
    NoSteps,
    #[error("sway/yaw inertia matrix is singular (det = {det})")]
    SingularInertia { det: f64 },
    #[error(transparent)]
    Force(#[from] ForceError),
    #[error("non-finite output from the {sub_model} model")]
    NonFinite { sub_model: &'static str },
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<DynamicsError>,
    },
    #[error("control series is empty or not strictly increasing in time")]
    BadControls,
}

/// Earth-fixed pose and through-water body velocities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShipState {
    /// m north
    pub x: f64,
    /// m east
    pub y: f64,
    /// heading, rad clockwise from north, kept in [−π, π)
    pub psi: f64,
    /// surge through water, m/s
    pub u: f64,
    /// sway through water, m/s (positive to starboard)
    pub v: f64,
    /// yaw rate, rad/s
    pub r: f64,
}

impl ShipState {
    /// Total through-water speed U.
    pub fn speed(&self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.psi, self.u, self.v, self.r]
    }

    fn from_array(a: [f64; 6]) -> Self {
        Self {
            x: a[0],
            y: a[1],
            psi: a[2],
            u: a[3],
            v: a[4],
            r: a[5],
        }
    }

    /// Pose rotated clockwise by `angle` about the earth origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let p = EarthVector::new(self.x, self.y).rotated(angle);
        Self {
            x: p.north,
            y: p.east,
            psi: wrap_pi(self.psi + angle),
            ..*self
        }
    }
}

/// Rudder angle and shaft rate applied over a step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    /// δ, rad, positive = starboard rudder
    pub rudder: f64,
    /// n, rev/s
    pub n: f64,
}

/// Time-indexed controls, held constant between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSeries {
    samples: Vec<(f64, ControlInput)>,
}

impl ControlSeries {
    pub fn new(samples: Vec<(f64, ControlInput)>) -> Result<Self, DynamicsError> {
        let ordered = samples.windows(2).all(|w| w[1].0 > w[0].0);
        if samples.is_empty() || !ordered || samples.iter().any(|(t, _)| !t.is_finite()) {
            return Err(DynamicsError::BadControls);
        }
        Ok(Self { samples })
    }

    pub fn constant(control: ControlInput) -> Self {
        Self {
            samples: vec![(0.0, control)],
        }
    }

    pub fn samples(&self) -> &[(f64, ControlInput)] {
        &self.samples
    }

    pub fn sample_at(&self, t: f64) -> ControlInput {
        let idx = self.samples.partition_point(|(ts, _)| *ts <= t);
        self.samples[idx.saturating_sub(1)].1
    }

    /// Same schedule with the rudder mirrored.
    pub fn mirrored(&self) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|(t, c)| {
                    (
                        *t,
                        ControlInput {
                            rudder: -c.rudder,
                            n: c.n,
                        },
                    )
                })
                .collect(),
        }
    }
}

/// Body-frame velocities over ground (u′, v′).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundVelocity {
    pub u: f64,
    pub v: f64,
}

/// Time derivative of [`ShipState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative {
    pub dx: f64,
    pub dy: f64,
    pub dpsi: f64,
    pub du: f64,
    pub dv: f64,
    pub dr: f64,
}

impl StateDerivative {
    fn to_array(self) -> [f64; 6] {
        [self.dx, self.dy, self.dpsi, self.du, self.dv, self.dr]
    }
}

/// Over-ground velocities: through-water velocities plus the current seen in body axes.
pub fn ground_velocities(state: &ShipState, current: EarthVector) -> GroundVelocity {
    let (cu, cv) = earth_to_body(current, state.psi);
    GroundVelocity {
        u: state.u + cu,
        v: state.v + cv,
    }
}

/// Inverse of [`ground_velocities`]: through-water (u, v) from over-ground (u′, v′).
pub fn water_velocities(psi: f64, ground: GroundVelocity, current: EarthVector) -> (f64, f64) {
    let (cu, cv) = earth_to_body(current, psi);
    (ground.u - cu, ground.v - cv)
}

/// Earth-frame pose rates `(ẋ, ẏ, ψ̇)`; the yaw rate over ground equals the one through water.
pub fn kinematics(state: &ShipState, ground: GroundVelocity) -> (f64, f64, f64) {
    let e = body_to_earth(ground.u, ground.v, state.psi);
    (e.north, e.east, state.r)
}

/// Solves `m·x = b` with the adjugate; the caller has checked `det > DET_EPS`.
fn solve_2x2(m: [[f64; 2]; 2], det: f64, b: [f64; 2]) -> [f64; 2] {
    [
        (m[1][1] * b[0] - m[0][1] * b[1]) / det,
        (m[0][0] * b[1] - m[1][0] * b[0]) / det,
    ]
}

/// Body-frame accelerations `(u̇, v̇, ṙ)` from the equations of motion.
///
/// Surge is explicit. Sway and yaw are coupled through the inertia matrix
/// and solved together. U in the damping terms is floored at [`U_EPS`].
/// The left-hand side is transcribed as displayed, including the
/// `(m·u − Y_r·U)·r` and `(m·x_G·u − N_r·U)·r` placements.
pub fn accelerations(
    cfg: &VesselConfig,
    state: &ShipState,
    forces: ForceTriplet,
) -> Result<(f64, f64, f64), DynamicsError> {
    let m = cfg.mass.mass;
    let xg = cfg.mass.x_g;
    let d = &cfg.derivatives;
    let ShipState { u, v, r, .. } = *state;

    let du =
        (forces.x - (d.y_vdot - d.x_vr - m) * v * r - (d.y_rdot - m * xg) * r * r) / (m - d.x_udot);

    let inertia = cfg.sway_yaw_inertia();
    let det = inertia[0][0] * inertia[1][1] - inertia[0][1] * inertia[1][0];
    if !(det > DET_EPS) {
        return Err(DynamicsError::SingularInertia { det });
    }
    let speed = state.speed().max(U_EPS);
    let damp_y = -d.y_v * speed * v + (m * u - d.y_r * speed) * r
        - d.y_vv * v * v.abs()
        - d.y_vr * v * r.abs()
        - d.y_rr * r * r.abs();
    let damp_n = -d.n_v * speed * v + (m * xg * u - d.n_r * speed) * r
        - d.n_rr * r * r.abs()
        - d.n_rrv * r * r * v / speed
        - d.n_vvr * v * v * r / speed;
    let [dv, dr] = solve_2x2(inertia, det, [forces.y - damp_y, forces.n - damp_n]);
    Ok((du, dv, dr))
}

/// One evaluation of the full right-hand side.
pub struct Evaluation {
    pub derivative: StateDerivative,
    pub forces: ForceBreakdown,
    pub ground: GroundVelocity,
}

pub fn evaluate(
    vessel: &Vessel,
    state: &ShipState,
    control: &ControlInput,
    env: &EnvironmentSample,
) -> Result<Evaluation, DynamicsError> {
    let forces = total_external_forces(vessel, state, control, env)?;
    if let Some(sub_model) = forces.first_non_finite() {
        return Err(DynamicsError::NonFinite { sub_model });
    }
    let ground = ground_velocities(state, env.current);
    let (dx, dy, dpsi) = kinematics(state, ground);
    let (du, dv, dr) = accelerations(vessel.config(), state, forces.total())?;
    let derivative = StateDerivative {
        dx,
        dy,
        dpsi,
        du,
        dv,
        dr,
    };
    if !derivative.to_array().iter().all(|v| v.is_finite()) {
        let sub_model = if !(dx.is_finite() && dy.is_finite()) {
            "kinematics"
        } else {
            "dynamics"
        };
        return Err(DynamicsError::NonFinite { sub_model });
    }
    Ok(Evaluation {
        derivative,
        forces,
        ground,
    })
}

fn axpy(s: [f64; 6], h: f64, k: [f64; 6]) -> [f64; 6] {
    std::array::from_fn(|i| s[i] + h * k[i])
}

/// One classical RK4 step with controls and environment held over the step.
pub fn step(
    vessel: &Vessel,
    state: &ShipState,
    control: &ControlInput,
    env: &EnvironmentSample,
    dt: f64,
) -> Result<ShipState, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidTimeStep(dt));
    }
    let k1 = evaluate(vessel, state, control, env)?.derivative.to_array();
    rk4_from(vessel, state, control, env, dt, k1)
}

fn rk4_from(
    vessel: &Vessel,
    state: &ShipState,
    control: &ControlInput,
    env: &EnvironmentSample,
    dt: f64,
    k1: [f64; 6],
) -> Result<ShipState, DynamicsError> {
    let f = |s: [f64; 6]| -> Result<[f64; 6], DynamicsError> {
        Ok(evaluate(vessel, &ShipState::from_array(s), control, env)?
            .derivative
            .to_array())
    };
    let s0 = state.to_array();
    let k2 = f(axpy(s0, 0.5 * dt, k1))?;
    let k3 = f(axpy(s0, 0.5 * dt, k2))?;
    let k4 = f(axpy(s0, dt, k3))?;
    let next: [f64; 6] =
        std::array::from_fn(|i| s0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    let mut out = ShipState::from_array(next);
    out.psi = wrap_pi(out.psi);
    Ok(out)
}

/// Integrates `n_steps` fixed steps from `initial`, sampling controls and
/// environment at each step start (t = k·dt).
///
/// Returns `n_steps + 1` records, each with the forces evaluated at that knot.
/// Pure: identical inputs give bit-identical output.
pub fn simulate(
    vessel: &Vessel,
    initial: &ShipState,
    controls: &ControlSeries,
    env: &EnvironmentSeries,
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory, DynamicsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidTimeStep(dt));
    }
    if n_steps == 0 {
        return Err(DynamicsError::NoSteps);
    }
    let at = |step: usize| {
        move |e: DynamicsError| DynamicsError::AtStep {
            step,
            source: Box::new(e),
        }
    };
    let mut records = Vec::with_capacity(n_steps + 1);
    let mut state = *initial;
    state.psi = wrap_pi(state.psi);
    for k in 0..=n_steps {
        let t = k as f64 * dt;
        let control = controls.sample_at(t);
        let sample = env.sample_at(t);
        let eval = evaluate(vessel, &state, &control, &sample).map_err(at(k))?;
        records.push(SimulationRecord {
            t,
            state,
            ground: eval.ground,
            control,
            forces: eval.forces,
        });
        if k < n_steps {
            state = rk4_from(
                vessel,
                &state,
                &control,
                &sample,
                dt,
                eval.derivative.to_array(),
            )
            .map_err(at(k))?;
        }
    }
    Ok(Trajectory::new(records, dt))
}
