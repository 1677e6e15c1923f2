//! Time-indexed trajectories shared by simulator output and recorded ground truth.

use std::fs;
use std::path::Path;

use crate::dynamics::{ControlInput, GroundVelocity, ShipState};
use crate::forces::ForceBreakdown;
use crate::textio::{csv_line, CsvError, CsvTable};

/// One knot of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimulationRecord {
    /// s
    pub t: f64,
    pub state: ShipState,
    /// (u′, v′)
    pub ground: GroundVelocity,
    pub control: ControlInput,
    pub forces: ForceBreakdown,
}

/// Knots at a uniform time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    records: Vec<SimulationRecord>,
    dt: f64,
}

pub const TRAJECTORY_COLUMNS: [&str; 20] = [
    "t", "x", "y", "psi", "u", "v", "r", "u_prime", "v_prime", "delta", "n_rps", "X_rud", "Y_rud",
    "N_rud", "X_thr", "X_wind", "Y_wind", "N_wind", "X_wave", "R_hull",
];

const REQUIRED_COLUMNS: [&str; 7] = ["t", "x", "y", "psi", "u", "v", "r"];

impl Trajectory {
    pub fn new(records: Vec<SimulationRecord>, dt: f64) -> Self {
        Self { records, dt }
    }

    /// Trajectory of bare states at `t = t0 + k·dt`.
    pub fn from_states(states: &[ShipState], t0: f64, dt: f64) -> Self {
        let records = states
            .iter()
            .enumerate()
            .map(|(k, s)| SimulationRecord {
                t: t0 + k as f64 * dt,
                state: *s,
                ..Default::default()
            })
            .collect();
        Self { records, dt }
    }

    pub fn records(&self) -> &[SimulationRecord] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut [SimulationRecord] {
        &mut self.records
    }

    pub fn states(&self) -> impl Iterator<Item = &ShipState> + '_ {
        self.records.iter().map(|r| &r.state)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn first(&self) -> &SimulationRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &SimulationRecord {
        self.records.last().expect("nonempty trajectory")
    }

    /// CSV text: header plus one row per knot, 9 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut out = TRAJECTORY_COLUMNS.join(",");
        out.push('\n');
        for rec in &self.records {
            let s = &rec.state;
            let f = &rec.forces;
            out.push_str(&csv_line([
                rec.t,
                s.x,
                s.y,
                s.psi,
                s.u,
                s.v,
                s.r,
                rec.ground.u,
                rec.ground.v,
                rec.control.rudder,
                rec.control.n,
                f.rudder.x,
                f.rudder.y,
                f.rudder.n,
                f.thrust,
                f.wind.x,
                f.wind.y,
                f.wind.n,
                f.wave.x,
                f.resistance.abs(),
            ]));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        fs::write(path, self.to_csv_string())
    }

    /// Reads a trajectory CSV. Only `t,x,y,psi,u,v,r` are required; other
    /// known columns are read when present.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, CsvError> {
        let table = CsvTable::read(path.as_ref())?;
        table.require(&REQUIRED_COLUMNS)?;
        let has = |c: &str| table.require(&[c]).is_ok();
        let opt = |row: usize, c: &str| -> Result<f64, CsvError> {
            if has(c) {
                table.f64_field(row, c)
            } else {
                Ok(0.0)
            }
        };
        let mut records = Vec::with_capacity(table.rows.len());
        for row in 0..table.rows.len() {
            let state = ShipState {
                x: table.f64_field(row, "x")?,
                y: table.f64_field(row, "y")?,
                psi: table.f64_field(row, "psi")?,
                u: table.f64_field(row, "u")?,
                v: table.f64_field(row, "v")?,
                r: table.f64_field(row, "r")?,
            };
            let t = table.f64_field(row, "t")?;
            let mut rec = SimulationRecord {
                t,
                state,
                ..Default::default()
            };
            rec.ground = GroundVelocity {
                u: opt(row, "u_prime")?,
                v: opt(row, "v_prime")?,
            };
            rec.control = ControlInput {
                rudder: opt(row, "delta")?,
                n: opt(row, "n_rps")?,
            };
            let f = &mut rec.forces;
            f.rudder.x = opt(row, "X_rud")?;
            f.rudder.y = opt(row, "Y_rud")?;
            f.rudder.n = opt(row, "N_rud")?;
            f.thrust = opt(row, "X_thr")?;
            f.wind.x = opt(row, "X_wind")?;
            f.wind.y = opt(row, "Y_wind")?;
            f.wind.n = opt(row, "N_wind")?;
            f.wave.x = opt(row, "X_wave")?;
            let r_hull = opt(row, "R_hull")?;
            f.resistance = if state.u < 0.0 { r_hull } else { -r_hull };
            if let Some(prev) = records.last() {
                let prev: &SimulationRecord = prev;
                if t <= prev.t {
                    return Err(table.row_err(row, "time must be strictly increasing"));
                }
            }
            records.push(rec);
        }
        let dt = match records.as_slice() {
            [a, b, ..] => b.t - a.t,
            _ => 0.0,
        };
        for (i, w) in records.windows(2).enumerate() {
            if ((w[1].t - w[0].t) - dt).abs() > 1e-6 * dt.abs().max(1.0) {
                return Err(table.row_err(i + 1, "time step is not uniform"));
            }
        }
        Ok(Self { records, dt })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Vessel;
    use crate::dynamics::{simulate, ControlSeries};
    use crate::environment::EnvironmentSeries;

    #[test]
    fn csv_roundtrip_at_nine_digits() {
        let v = Vessel::synthetic();
        let traj = simulate(
            &v,
            &ShipState {
                u: 3.0,
                ..ShipState::default()
            },
            &ControlSeries::constant(ControlInput {
                rudder: 0.3,
                n: 1.7,
            }),
            &EnvironmentSeries::calm(),
            1.0,
            20,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        traj.write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("t,x,y,psi,u,v,r,u_prime,v_prime,delta,n_rps,X_rud"));
        assert_eq!(text.lines().count(), 22);
        let back = Trajectory::read_csv(&p).unwrap();
        assert_eq!(back.len(), traj.len());
        assert_eq!(back.dt(), 1.0);
        for (a, b) in back.records().iter().zip(traj.records()) {
            assert!((a.state.x - b.state.x).abs() <= 1e-8 * b.state.x.abs().max(1.0));
            assert!(
                (a.forces.rudder.n - b.forces.rudder.n).abs()
                    <= 1e-8 * b.forces.rudder.n.abs().max(1.0)
            );
            assert!(
                (a.forces.resistance - b.forces.resistance).abs()
                    <= 1e-8 * b.forces.resistance.abs().max(1.0)
            );
        }
        // printing is deterministic
        assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn rejects_non_uniform_time() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(
            &p,
            "t,x,y,psi,u,v,r\n0,0,0,0,1,0,0\n1,1,0,0,1,0,0\n3,3,0,0,1,0,0\n",
        )
        .unwrap();
        assert!(Trajectory::read_csv(&p)
            .unwrap_err()
            .to_string()
            .contains("not uniform"));
        std::fs::write(&p, "t,x,y,psi,u,v\n0,0,0,0,1,0\n").unwrap();
        assert!(Trajectory::read_csv(&p)
            .unwrap_err()
            .to_string()
            .contains("`r`"));
    }
}
