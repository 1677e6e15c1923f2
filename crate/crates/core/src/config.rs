//! Vessel parameter set: mass properties, hydrodynamic derivatives and the
//! rudder, propeller, windage and hull sub-model constants.
//!
//! Units throughout: mass in tonnes, inertia in tonne·m², lengths in m,
//! speeds in m/s, angles in rad (degrees only inside config tables), forces
//! in kN, moments in kN·m, densities in kg/m³. With mass in tonnes,
//! tonne·m/s² is kN, so the equations of motion need no conversion factors.
//!
//! Symbol map for the equations of motion and force models:
//!
//! | symbol | field |
//! |---|---|
//! | m, I_z, x_G | [`MassProperties`] `mass`, `yaw_inertia`, `x_g` |
//! | X_u̇, Y_v̇, Y_ṙ, N_v̇, N_ṙ | [`HydrodynamicDerivatives`] `x_udot` … `n_rdot` |
//! | Y_v, Y_r, N_v, N_r | [`HydrodynamicDerivatives`] `y_v`, `y_r`, `n_v`, `n_r` |
//! | Y_vv, Y_vr, Y_rr, N_rr, N_rrv, N_vvr, X_vr | [`HydrodynamicDerivatives`] |
//! | A_R, x_R, a_H, t_R, C_L, C_D, γ_R | [`RudderConfig`] |
//! | D, t_p, w_p, k_T (c_i), k_Q (a_i) | [`PropellerConfig`] |
//! | A_F, A_L, L_OA, ρ_A, C_X, C_Y, C_N | [`WindageConfig`] |
//! | B, L_BWL, L_pp, ρ, R(u) | [`HullConfig`] |
//! | r_max | [`VesselConfig::r_max`] |
//! | x, y, ψ, u, v, r | [`crate::dynamics::ShipState`] |
//! | u′, v′ | [`crate::dynamics::GroundVelocity`] |
//! | H_W1/3, s_sc | [`crate::environment::EnvironmentSample`] |
//! | U_wind, ψ_wind | [`crate::environment::ApparentWind`] |
//! | n, δ | [`crate::dynamics::ControlInput`] |
//! | g | [`crate::forces::GRAVITY`] |

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::table::{AngleTable, CoefficientCurve, Parity, TableError};

/// Singularity threshold for the sway/yaw inertia matrix determinant (tonne²·m²).
pub const DET_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassProperties {
    /// m, tonnes
    pub mass: f64,
    /// I_z, tonne·m²
    pub yaw_inertia: f64,
    /// x_G, m forward of midship
    pub x_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydrodynamicDerivatives {
    pub x_udot: f64,
    pub y_vdot: f64,
    pub y_rdot: f64,
    pub n_vdot: f64,
    pub n_rdot: f64,
    pub y_v: f64,
    pub y_r: f64,
    pub n_v: f64,
    pub n_r: f64,
    pub y_vv: f64,
    pub y_vr: f64,
    pub y_rr: f64,
    pub n_rr: f64,
    pub n_rrv: f64,
    pub n_vvr: f64,
    pub x_vr: f64,
}

impl HydrodynamicDerivatives {
    fn values(&self) -> [(&'static str, f64); 16] {
        [
            ("derivatives.x_udot", self.x_udot),
            ("derivatives.y_vdot", self.y_vdot),
            ("derivatives.y_rdot", self.y_rdot),
            ("derivatives.n_vdot", self.n_vdot),
            ("derivatives.n_rdot", self.n_rdot),
            ("derivatives.y_v", self.y_v),
            ("derivatives.y_r", self.y_r),
            ("derivatives.n_v", self.n_v),
            ("derivatives.n_r", self.n_r),
            ("derivatives.y_vv", self.y_vv),
            ("derivatives.y_vr", self.y_vr),
            ("derivatives.y_rr", self.y_rr),
            ("derivatives.n_rr", self.n_rr),
            ("derivatives.n_rrv", self.n_rrv),
            ("derivatives.n_vvr", self.n_vvr),
            ("derivatives.x_vr", self.x_vr),
        ]
    }
}

fn default_gamma_r() -> f64 {
    0.4
}

fn default_k_prop() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RudderConfig {
    /// A_R, m²
    pub area: f64,
    /// x_R, m (negative aft)
    pub x_r: f64,
    pub a_h: f64,
    pub t_r: f64,
    /// Flow-straightening coefficient applied to the local drift at the rudder.
    #[serde(default = "default_gamma_r")]
    pub gamma_r: f64,
    /// Slipstream augmentation of the rudder inflow speed.
    #[serde(default = "default_k_prop")]
    pub k_prop: f64,
    /// C_L over effective inflow angle.
    pub lift: AngleTable,
    /// C_D over effective inflow angle.
    pub drag: AngleTable,
}

/// Open-water coefficient polynomial `c1 + c2·J + c3·J² (+ c4·J³)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OpenWaterPolynomial(pub [f64; 4]);

impl OpenWaterPolynomial {
    pub fn quadratic(c1: f64, c2: f64, c3: f64) -> Self {
        Self([c1, c2, c3, 0.0])
    }

    pub fn eval(&self, j: f64) -> f64 {
        let [c1, c2, c3, c4] = self.0;
        c1 + j * (c2 + j * (c3 + j * c4))
    }
}

impl TryFrom<Vec<f64>> for OpenWaterPolynomial {
    type Error = String;
    fn try_from(v: Vec<f64>) -> Result<Self, String> {
        match v.as_slice() {
            [a, b, c] => Ok(Self([*a, *b, *c, 0.0])),
            [a, b, c, d] => Ok(Self([*a, *b, *c, *d])),
            _ => Err(format!(
                "expected 3 or 4 polynomial coefficients, got {}",
                v.len()
            )),
        }
    }
}

impl From<OpenWaterPolynomial> for Vec<f64> {
    fn from(p: OpenWaterPolynomial) -> Self {
        p.0.to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropellerConfig {
    /// D, m
    pub diameter: f64,
    pub t_p: f64,
    pub w_p: f64,
    pub k_t: OpenWaterPolynomial,
    pub k_q: OpenWaterPolynomial,
}

fn default_rho_air() -> f64 {
    1.225
}

fn default_rho_water() -> f64 {
    1025.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindageConfig {
    /// A_F, m²
    pub a_f: f64,
    /// A_L, m²
    pub a_l: f64,
    /// L_OA, m
    pub l_oa: f64,
    #[serde(default = "default_rho_air")]
    pub rho_air: f64,
    /// C_X over apparent wind angle; mirrored as an even function when given over [0°, 180°].
    pub c_x: AngleTable,
    /// C_Y, mirrored as an odd function.
    pub c_y: AngleTable,
    /// C_N, mirrored as an odd function.
    pub c_n: AngleTable,
}

/// Calm-water resistance R(u) in kN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResistanceCurve {
    /// `R = r2·u²`, r2 in kN/(m/s)².
    Quadratic { r2: f64 },
    /// `[speed_mps, resistance_kn]` pairs, linearly interpolated and
    /// extrapolated with the last segment's slope.
    Table(Vec<[f64; 2]>),
}

impl ResistanceCurve {
    /// R at non-negative speed `speed`.
    pub fn eval(&self, speed: f64) -> f64 {
        match self {
            ResistanceCurve::Quadratic { r2 } => r2 * speed * speed,
            ResistanceCurve::Table(pts) => {
                match pts.len() {
                    0 => return 0.0,
                    1 => return pts[0][1],
                    _ => {}
                }
                let hi = pts
                    .partition_point(|p| p[0] <= speed)
                    .clamp(1, pts.len() - 1);
                let [u0, r0] = pts[hi - 1];
                let [u1, r1] = pts[hi];
                r0 + (speed - u0) * (r1 - r0) / (u1 - u0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullConfig {
    /// B, m
    pub breadth: f64,
    /// L_BWL, m: bow length on the waterline to 95% of maximum beam
    pub l_bwl: f64,
    /// L_pp, m
    pub l_pp: f64,
    #[serde(default = "default_rho_water")]
    pub rho: f64,
    pub resistance: ResistanceCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VesselConfig {
    pub mass: MassProperties,
    pub derivatives: HydrodynamicDerivatives,
    pub rudder: RudderConfig,
    pub propeller: PropellerConfig,
    pub windage: WindageConfig,
    pub hull: HullConfig,
    /// Maximum yaw rate, rad/s.
    pub r_max: f64,
}

const SYNTHETIC_JSON: &str = include_str!("../data/synthetic_vessel.json");

impl VesselConfig {
    /// Synthetic coefficient set for an ~80 m coastal container ship.
    ///
    /// The values are plausible, not measured; see `data/synthetic_vessel.json`.
    pub fn synthetic() -> Self {
        from_json_str(SYNTHETIC_JSON).expect("bundled synthetic config is valid")
    }

    /// Sway/yaw inertia matrix `[[m − Y_v̇, m·x_G − Y_ṙ], [m·x_G − N_v̇, I_z − N_ṙ]]`.
    pub fn sway_yaw_inertia(&self) -> [[f64; 2]; 2] {
        let m = self.mass.mass;
        let mxg = m * self.mass.x_g;
        let d = &self.derivatives;
        [
            [m - d.y_vdot, mxg - d.y_rdot],
            [mxg - d.n_vdot, self.mass.yaw_inertia - d.n_rdot],
        ]
    }

    /// Checks every invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mp = &self.mass;
        positive("mass.mass", mp.mass)?;
        positive("mass.yaw_inertia", mp.yaw_inertia)?;
        finite("mass.x_g", mp.x_g)?;

        let hull = &self.hull;
        positive("hull.breadth", hull.breadth)?;
        positive("hull.l_bwl", hull.l_bwl)?;
        positive("hull.l_pp", hull.l_pp)?;
        positive("hull.rho", hull.rho)?;
        if mp.x_g.abs() >= hull.l_pp / 2.0 {
            return Err(invalid(
                "mass.x_g",
                format!("|x_G| must be < L_pp/2 = {}", hull.l_pp / 2.0),
            ));
        }
        validate_resistance(&hull.resistance)?;

        let d = &self.derivatives;
        for (field, value) in d.values() {
            finite(field, value)?;
        }
        if mp.mass - d.x_udot <= 0.0 {
            return Err(invalid(
                "derivatives.x_udot",
                "surge inertia m - X_udot must be > 0",
            ));
        }
        let [[a, b], [c, e]] = self.sway_yaw_inertia();
        let det = a * e - b * c;
        if !(det > DET_EPS) {
            return Err(invalid(
                "derivatives",
                format!("sway/yaw inertia matrix determinant {det} must be > 0"),
            ));
        }

        let rud = &self.rudder;
        positive("rudder.area", rud.area)?;
        finite("rudder.x_r", rud.x_r)?;
        finite("rudder.a_h", rud.a_h)?;
        finite("rudder.gamma_r", rud.gamma_r)?;
        positive("rudder.k_prop", rud.k_prop)?;
        unit_interval("rudder.t_r", rud.t_r)?;
        let lift = table("rudder.lift", rud.lift.clamped_curve())?;
        let drag = table("rudder.drag", rud.drag.clamped_curve())?;
        if rud.drag.pairs().iter().any(|p| p[1] < 0.0) {
            return Err(invalid("rudder.drag", "C_D must be >= 0 everywhere"));
        }
        let cl0 = lift.eval(0.0).expect("nonempty");
        if cl0.abs() > 1e-12 {
            return Err(invalid(
                "rudder.lift",
                format!("C_L(0) must be 0, got {cl0}"),
            ));
        }
        let _ = drag;

        let p = &self.propeller;
        positive("propeller.diameter", p.diameter)?;
        unit_interval("propeller.t_p", p.t_p)?;
        unit_interval("propeller.w_p", p.w_p)?;
        for (field, poly) in [("propeller.k_t", p.k_t), ("propeller.k_q", p.k_q)] {
            if poly.0.iter().any(|c| !c.is_finite()) {
                return Err(invalid(field, "coefficients must be finite"));
            }
        }
        if !(p.k_t.0[0] > 0.0) {
            return Err(invalid("propeller.k_t", "k_T(0) = c1 must be > 0"));
        }

        let w = &self.windage;
        positive("windage.a_f", w.a_f)?;
        positive("windage.a_l", w.a_l)?;
        positive("windage.l_oa", w.l_oa)?;
        positive("windage.rho_air", w.rho_air)?;
        table("windage.c_x", w.c_x.periodic_curve(Parity::Even))?;
        table("windage.c_y", w.c_y.periodic_curve(Parity::Odd))?;
        table("windage.c_n", w.c_n.periodic_curve(Parity::Odd))?;

        positive("r_max", self.r_max)?;
        Ok(())
    }
}

fn finite(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, "must be finite"))
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be > 0, got {v}")))
    }
}

fn unit_interval(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(field, format!("must be in [0, 1), got {v}")))
    }
}

fn table(
    field: &'static str,
    curve: Result<CoefficientCurve, TableError>,
) -> Result<CoefficientCurve, ConfigError> {
    let curve = curve.map_err(|e| invalid(field, e.to_string()))?;
    if curve.is_empty() {
        return Err(invalid(field, TableError::Empty.to_string()));
    }
    Ok(curve)
}

fn validate_resistance(curve: &ResistanceCurve) -> Result<(), ConfigError> {
    const FIELD: &str = "hull.resistance";
    match curve {
        ResistanceCurve::Quadratic { r2 } => {
            if !(r2.is_finite() && *r2 >= 0.0) {
                return Err(invalid(FIELD, "r2 must be finite and >= 0"));
            }
        }
        ResistanceCurve::Table(pts) => {
            if pts.len() < 2 {
                return Err(invalid(FIELD, "table needs at least two points"));
            }
            if pts[0] != [0.0, 0.0] {
                return Err(invalid(FIELD, "table must start at [0, 0] (R(0) = 0)"));
            }
            for w in pts.windows(2) {
                if !(w[1][0] > w[0][0]) || !w[1][0].is_finite() {
                    return Err(invalid(FIELD, "speeds must be strictly increasing"));
                }
                if !(w[1][1] >= w[0][1]) || !w[1][1].is_finite() {
                    return Err(invalid(FIELD, "resistance must be nondecreasing in speed"));
                }
            }
        }
    }
    Ok(())
}

/// Parses and validates a config document.
pub fn from_json_str(json: &str) -> Result<VesselConfig, ConfigError> {
    let cfg: VesselConfig = serde_json::from_str(json)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<VesselConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json_str(&text)
}

pub fn to_json_string(cfg: &VesselConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

pub fn write_config(cfg: &VesselConfig, path: impl AsRef<Path>) -> Result<(), ConfigError> {
    let path = path.as_ref();
    fs::write(path, to_json_string(cfg)).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Validated config with its coefficient curves built for evaluation.
///
/// Immutable; share it freely across simulation workers.
#[derive(Debug, Clone)]
pub struct Vessel {
    config: VesselConfig,
    pub(crate) lift: CoefficientCurve,
    pub(crate) drag: CoefficientCurve,
    pub(crate) c_x: CoefficientCurve,
    pub(crate) c_y: CoefficientCurve,
    pub(crate) c_n: CoefficientCurve,
}

impl Vessel {
    pub fn new(config: VesselConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Self::build(config))
    }

    /// Builds curves without checking physical invariants. Tables must still be well-formed.
    ///
    /// Intended for tests that exercise degenerate coefficient sets.
    pub fn new_unchecked(config: VesselConfig) -> Result<Self, ConfigError> {
        table("rudder.lift", config.rudder.lift.clamped_curve())?;
        table("rudder.drag", config.rudder.drag.clamped_curve())?;
        table(
            "windage.c_x",
            config.windage.c_x.periodic_curve(Parity::Even),
        )?;
        table(
            "windage.c_y",
            config.windage.c_y.periodic_curve(Parity::Odd),
        )?;
        table(
            "windage.c_n",
            config.windage.c_n.periodic_curve(Parity::Odd),
        )?;
        Ok(Self::build(config))
    }

    fn build(config: VesselConfig) -> Self {
        let w = &config.windage;
        Self {
            lift: config.rudder.lift.clamped_curve().expect("validated"),
            drag: config.rudder.drag.clamped_curve().expect("validated"),
            c_x: w.c_x.periodic_curve(Parity::Even).expect("validated"),
            c_y: w.c_y.periodic_curve(Parity::Odd).expect("validated"),
            c_n: w.c_n.periodic_curve(Parity::Odd).expect("validated"),
            config,
        }
    }

    pub fn synthetic() -> Self {
        Self::build(VesselConfig::synthetic())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Ok(Self::build(load_config(path)?))
    }

    pub fn config(&self) -> &VesselConfig {
        &self.config
    }
}
