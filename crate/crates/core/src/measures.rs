//! Distance measures between a ground-truth trajectory and a prediction.
//!
//! All seven measures average a per-knot error over knots `1..=n` of two
//! time-aligned trajectories with `n + 1` knots; knot 0 is the shared initial
//! condition. Heading residuals are wrapped to (−π, π] first.
//!
//! * MMD / MED: Manhattan / Euclidean position error, m.
//! * ASD / MSD: Manhattan / Euclidean error over all six state dimensions
//!   (mixed units).
//! * PMD / PED: position, heading and surge error relative to the truth
//!   magnitude, %. Positions are taken relative to the truth's first knot and
//!   the denominator uses absolute values, so it is frame-independent and
//!   non-negative. Knots whose denominator is below [`DENOM_EPS`] are skipped.
//! * cVDM: each dimension normalized by a trajectory-specific scale (track
//!   length, mean speed, π, maximum yaw rate), %.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::angle_diff;
use crate::textio::round_sig9;
use crate::trajectory::Trajectory;

pub const DENOM_EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("trajectories are not aligned: {0}")]
    Misaligned(String),
    #[error("every knot has a degenerate denominator (< {DENOM_EPS})")]
    DegenerateDenominator,
    #[error("degenerate normalization context: {0}")]
    DegenerateContext(String),
    #[error("cVDM value must be finite and >= 0, got {0}")]
    InvalidValue(f64),
}

/// Truth and prediction with equal length (≥ 2) and identical timestamps.
#[derive(Debug, Clone, Copy)]
pub struct AlignedPair<'a> {
    truth: &'a Trajectory,
    prediction: &'a Trajectory,
}

impl<'a> AlignedPair<'a> {
    pub fn new(truth: &'a Trajectory, prediction: &'a Trajectory) -> Result<Self, MeasureError> {
        if truth.len() != prediction.len() {
            return Err(MeasureError::Misaligned(format!(
                "truth has {} knots, prediction has {}",
                truth.len(),
                prediction.len()
            )));
        }
        if truth.len() < 2 {
            return Err(MeasureError::Misaligned("need at least 2 knots".into()));
        }
        for (i, (a, b)) in truth.records().iter().zip(prediction.records()).enumerate() {
            if a.t != b.t {
                return Err(MeasureError::Misaligned(format!(
                    "timestamps differ at knot {i}: {} vs {}",
                    a.t, b.t
                )));
            }
        }
        Ok(Self { truth, prediction })
    }

    pub fn truth(&self) -> &'a Trajectory {
        self.truth
    }

    pub fn prediction(&self) -> &'a Trajectory {
        self.prediction
    }

    /// Number of averaged knots, n.
    pub fn n(&self) -> usize {
        self.truth.len() - 1
    }

    fn diffs(&self) -> impl Iterator<Item = [f64; 6]> + 'a {
        let truth = self.truth.records();
        let pred = self.prediction.records();
        truth.iter().zip(pred).skip(1).map(|(t, p)| {
            let (a, b) = (&t.state, &p.state);
            [
                a.x - b.x,
                a.y - b.y,
                angle_diff(a.psi, b.psi),
                a.u - b.u,
                a.v - b.v,
                a.r - b.r,
            ]
        })
    }

    fn mean(&self, per_knot: impl Fn([f64; 6]) -> f64) -> f64 {
        self.diffs().map(per_knot).sum::<f64>() / self.n() as f64
    }
}

fn l1(d: &[f64]) -> f64 {
    d.iter().map(|v| v.abs()).sum()
}

fn l2(d: &[f64]) -> f64 {
    d.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Mean Manhattan distance, m.
pub fn mmd(pair: &AlignedPair) -> f64 {
    pair.mean(|d| l1(&d[..2]))
}

/// Mean Euclidean distance, m.
pub fn med(pair: &AlignedPair) -> f64 {
    pair.mean(|d| l2(&d[..2]))
}

/// Absolute state distance over x, y, ψ, u, v, r.
pub fn asd(pair: &AlignedPair) -> f64 {
    pair.mean(|d| l1(&d))
}

/// Mean state distance over x, y, ψ, u, v, r.
pub fn msd(pair: &AlignedPair) -> f64 {
    pair.mean(|d| l2(&d))
}

/// A relative measure together with the number of knots left out of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relative {
    pub value: f64,
    pub skipped: usize,
}

/// Truth magnitudes `[x̄ − x̄₀, ȳ − ȳ₀, ψ̄, ū]` per knot in the segment-local frame.
fn truth_local<'a>(pair: &AlignedPair<'a>) -> impl Iterator<Item = [f64; 4]> + 'a {
    let truth = pair.truth;
    let origin = truth.first().state;
    truth.records().iter().skip(1).map(move |r| {
        [
            r.state.x - origin.x,
            r.state.y - origin.y,
            r.state.psi,
            r.state.u,
        ]
    })
}

fn relative(pair: &AlignedPair, norm: fn(&[f64]) -> f64) -> Result<Relative, MeasureError> {
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for (d, t) in pair.diffs().zip(truth_local(pair)) {
        // the same knots are skipped for both norms: l2 <= l1
        if l2(&t) < DENOM_EPS {
            skipped += 1;
            continue;
        }
        sum += norm(&d[..4]) / norm(&t);
        used += 1;
    }
    if used == 0 {
        return Err(MeasureError::DegenerateDenominator);
    }
    Ok(Relative {
        value: 100.0 * sum / used as f64,
        skipped,
    })
}

/// Percentage of Manhattan distance over x, y, ψ, u.
pub fn pmd(pair: &AlignedPair) -> Result<Relative, MeasureError> {
    relative(pair, l1)
}

/// Percentage of Euclidean distance over x, y, ψ, u.
pub fn ped(pair: &AlignedPair) -> Result<Relative, MeasureError> {
    relative(pair, l2)
}

/// Per-trajectory scales for cVDM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationContext {
    /// L̄: track length of the truth, m
    pub length: f64,
    /// Ū_mean: mean through-water speed of the truth, m/s
    pub mean_speed: f64,
    /// r_max, rad/s
    pub r_max: f64,
}

impl NormalizationContext {
    pub fn validate(&self) -> Result<(), MeasureError> {
        for (name, v) in [
            ("L_bar", self.length),
            ("U_mean", self.mean_speed),
            ("r_max", self.r_max),
        ] {
            if !(v.is_finite() && v >= DENOM_EPS) {
                return Err(MeasureError::DegenerateContext(format!("{name} = {v}")));
            }
        }
        Ok(())
    }
}

/// Track length (sum of chords) and mean speed of the truth, plus `r_max`.
pub fn normalization_context(
    truth: &Trajectory,
    r_max: f64,
) -> Result<NormalizationContext, MeasureError> {
    if truth.len() < 2 {
        return Err(MeasureError::DegenerateContext(
            "truth needs at least 2 knots".into(),
        ));
    }
    let recs = truth.records();
    let length = recs
        .windows(2)
        .map(|w| (w[1].state.x - w[0].state.x).hypot(w[1].state.y - w[0].state.y))
        .sum();
    let mean_speed = recs.iter().map(|r| r.state.speed()).sum::<f64>() / recs.len() as f64;
    let ctx = NormalizationContext {
        length,
        mean_speed,
        r_max,
    };
    ctx.validate()?;
    Ok(ctx)
}

/// Custom vessel distance measure, %.
pub fn cvdm(pair: &AlignedPair, ctx: &NormalizationContext) -> Result<f64, MeasureError> {
    ctx.validate()?;
    Ok(100.0
        * pair.mean(|d| {
            (d[0].abs() + d[1].abs()) / ctx.length
                + d[2].abs() / PI
                + (d[3].abs() + d[4].abs()) / ctx.mean_speed
                + d[5].abs() / ctx.r_max
        }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Optimal,
    Satisfactory,
    SubOptimal,
}

impl Category {
    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Optimal => "optimal",
            Category::Satisfactory => "satisfactory",
            Category::SubOptimal => "sub_optimal",
        }
    }
}

/// cVDM band edges, %.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryThresholds {
    pub optimal_below: f64,
    pub satisfactory_below: f64,
}

impl Default for CategoryThresholds {
    fn default() -> Self {
        Self {
            optimal_below: 1.5,
            satisfactory_below: 4.0,
        }
    }
}

impl CategoryThresholds {
    pub fn categorize(&self, cvdm_value: f64) -> Category {
        if cvdm_value < self.optimal_below {
            Category::Optimal
        } else if cvdm_value < self.satisfactory_below {
            Category::Satisfactory
        } else {
            Category::SubOptimal
        }
    }
}

/// Quality band of a cVDM value under the default thresholds.
pub fn categorize(cvdm_value: f64) -> Result<Category, MeasureError> {
    if !(cvdm_value.is_finite() && cvdm_value >= 0.0) {
        return Err(MeasureError::InvalidValue(cvdm_value));
    }
    Ok(CategoryThresholds::default().categorize(cvdm_value))
}

/// All seven measures for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub mmd_m: f64,
    pub med_m: f64,
    pub asd: f64,
    pub msd: f64,
    pub pmd_pct: f64,
    pub ped_pct: f64,
    pub cvdm_pct: f64,
    pub category: Category,
    pub skipped_knots: usize,
}

impl MeasureReport {
    /// Copy with every float rounded to 9 significant digits.
    pub fn rounded(&self) -> Self {
        Self {
            mmd_m: round_sig9(self.mmd_m),
            med_m: round_sig9(self.med_m),
            asd: round_sig9(self.asd),
            msd: round_sig9(self.msd),
            pmd_pct: round_sig9(self.pmd_pct),
            ped_pct: round_sig9(self.ped_pct),
            cvdm_pct: round_sig9(self.cvdm_pct),
            ..self.clone()
        }
    }
}

/// Scores a prediction against its truth; the cVDM context comes from the truth.
pub fn measure_all(
    truth: &Trajectory,
    prediction: &Trajectory,
    r_max: f64,
    thresholds: &CategoryThresholds,
) -> Result<MeasureReport, MeasureError> {
    let pair = AlignedPair::new(truth, prediction)?;
    let ctx = normalization_context(truth, r_max)?;
    let pmd = pmd(&pair)?;
    let ped = ped(&pair)?;
    let cvdm_pct = cvdm(&pair, &ctx)?;
    Ok(MeasureReport {
        mmd_m: mmd(&pair),
        med_m: med(&pair),
        asd: asd(&pair),
        msd: msd(&pair),
        pmd_pct: pmd.value,
        ped_pct: ped.value,
        cvdm_pct,
        category: thresholds.categorize(cvdm_pct),
        skipped_knots: pmd.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ShipState;
    use approx::assert_abs_diff_eq;

    fn straight(n: usize, speed: f64) -> Trajectory {
        let states: Vec<_> = (0..=n)
            .map(|k| ShipState {
                x: speed * k as f64,
                u: speed,
                ..ShipState::default()
            })
            .collect();
        Trajectory::from_states(&states, 0.0, 1.0)
    }

    #[test]
    fn single_knot_hand_values() {
        let truth =
            Trajectory::from_states(&[ShipState::default(), ShipState::default()], 0.0, 1.0);
        let off = ShipState {
            x: 3.0,
            y: 4.0,
            ..ShipState::default()
        };
        let pred = Trajectory::from_states(&[ShipState::default(), off], 0.0, 1.0);
        let pair = AlignedPair::new(&truth, &pred).unwrap();
        assert_eq!(med(&pair), 5.0);
        assert_eq!(mmd(&pair), 7.0);
        assert_eq!(asd(&pair), 7.0);
        assert_eq!(msd(&pair), 5.0);
    }

    #[test]
    fn identical_is_zero() {
        let t = straight(10, 3.0);
        let r = measure_all(&t, &t, 0.0314, &CategoryThresholds::default()).unwrap();
        assert_eq!(
            [r.mmd_m, r.med_m, r.asd, r.msd, r.pmd_pct, r.ped_pct, r.cvdm_pct],
            [0.0; 7]
        );
        assert_eq!(r.category, Category::Optimal);
    }

    #[test]
    fn heading_off_by_pi_costs_one_hundred_points() {
        let truth = straight(10, 3.0);
        let mut pred = truth.clone();
        for rec in pred.records_mut() {
            rec.state.psi = PI;
        }
        let pair = AlignedPair::new(&truth, &pred).unwrap();
        let ctx = NormalizationContext {
            length: 123.0,
            mean_speed: 7.0,
            r_max: 0.01,
        };
        assert_abs_diff_eq!(cvdm(&pair, &ctx).unwrap(), 100.0, epsilon = 1e-12);
        // and the wrapped residual is exactly π, not -π
        for rec in pred.records_mut() {
            rec.state.psi = -PI;
        }
        let pair = AlignedPair::new(&truth, &pred).unwrap();
        assert_abs_diff_eq!(cvdm(&pair, &ctx).unwrap(), 100.0, epsilon = 1e-12);
    }

    #[test]
    fn misalignment() {
        let a = straight(10, 3.0);
        let b = straight(9, 3.0);
        assert!(matches!(
            AlignedPair::new(&a, &b),
            Err(MeasureError::Misaligned(_))
        ));
        let c = Trajectory::from_states(&a.states().copied().collect::<Vec<_>>(), 0.5, 1.0);
        assert!(matches!(
            AlignedPair::new(&a, &c),
            Err(MeasureError::Misaligned(_))
        ));
        let one = straight(0, 3.0);
        assert!(matches!(
            AlignedPair::new(&one, &one),
            Err(MeasureError::Misaligned(_))
        ));
    }

    #[test]
    fn context_examples() {
        let ctx = normalization_context(&straight(120, 5.0), 0.0314).unwrap();
        assert_abs_diff_eq!(ctx.length, 600.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ctx.mean_speed, 5.0, epsilon = 1e-12);
        assert_eq!(ctx.r_max, 0.0314);
        let still = straight(120, 0.0);
        assert!(matches!(
            normalization_context(&still, 0.0314),
            Err(MeasureError::DegenerateContext(_))
        ));
    }

    #[test]
    fn quarter_circle_length() {
        let radius = 200.0;
        let n = 90;
        let states: Vec<_> = (0..=n)
            .map(|k| {
                let a = (k as f64 / n as f64) * PI / 2.0;
                ShipState {
                    x: radius * a.sin(),
                    y: radius * (1.0 - a.cos()),
                    u: 3.0,
                    ..ShipState::default()
                }
            })
            .collect();
        let ctx =
            normalization_context(&Trajectory::from_states(&states, 0.0, 1.0), 0.0314).unwrap();
        let arc = radius * PI / 2.0;
        // chord sum falls short of the arc by about arc·θ²/24 with θ the step angle
        let theta = PI / 2.0 / n as f64;
        assert!(ctx.length < arc);
        assert_abs_diff_eq!(
            ctx.length,
            arc * (1.0 - theta * theta / 24.0),
            epsilon = 1e-6
        );
    }

    #[test]
    fn relative_measures_skip_degenerate_knots() {
        // at rest at the anchor with zero heading: every denominator vanishes
        let still = straight(5, 0.0);
        let pair = AlignedPair::new(&still, &still).unwrap();
        assert_eq!(pmd(&pair), Err(MeasureError::DegenerateDenominator));
        let mut truth = straight(5, 2.0);
        truth.records_mut()[1].state = ShipState::default();
        let pair = AlignedPair::new(&truth, &truth).unwrap();
        assert_eq!(
            pmd(&pair).unwrap(),
            Relative {
                value: 0.0,
                skipped: 1
            }
        );
    }

    #[test]
    fn pmd_ped_hand_values() {
        let truth = Trajectory::from_states(
            &[
                ShipState::default(),
                ShipState {
                    x: 3.0,
                    y: 4.0,
                    u: 0.0,
                    ..ShipState::default()
                },
            ],
            0.0,
            1.0,
        );
        let pred = Trajectory::from_states(
            &[
                ShipState::default(),
                ShipState {
                    x: 3.0,
                    y: 4.5,
                    ..ShipState::default()
                },
            ],
            0.0,
            1.0,
        );
        let pair = AlignedPair::new(&truth, &pred).unwrap();
        assert_abs_diff_eq!(
            pmd(&pair).unwrap().value,
            100.0 * 0.5 / 7.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            ped(&pair).unwrap().value,
            100.0 * 0.5 / 5.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn table_bands() {
        for (v, c) in [
            (0.8, Category::Optimal),
            (0.9, Category::Optimal),
            (1.7, Category::Satisfactory),
            (2.3, Category::Satisfactory),
            (5.9, Category::SubOptimal),
            (8.7, Category::SubOptimal),
        ] {
            assert_eq!(categorize(v).unwrap(), c);
        }
        assert_eq!(categorize(1.5).unwrap(), Category::Satisfactory);
        assert_eq!(categorize(4.0).unwrap(), Category::SubOptimal);
        assert!(categorize(-0.1).is_err());
        let strict = CategoryThresholds {
            optimal_below: 0.5,
            satisfactory_below: 1.0,
        };
        assert_eq!(strict.categorize(0.8), Category::Satisfactory);
    }

    #[test]
    fn report_json_keys() {
        let t = straight(4, 2.0);
        let r = measure_all(&t, &t, 0.0314, &CategoryThresholds::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in [
            "mmd_m",
            "med_m",
            "asd",
            "msd",
            "pmd_pct",
            "ped_pct",
            "cvdm_pct",
            "category",
            "skipped_knots",
        ] {
            assert!(keys.contains(&k.to_string()), "missing {k}");
        }
        assert_eq!(v["category"], "optimal");
    }
}
