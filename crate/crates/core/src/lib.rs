//! Physics-based 3-DoF ship maneuvering simulator with trajectory distance
//! measures and a batch harness that replays recorded voyages.
//!
//! The model chain per time step: controls and weather feed the force
//! models ([`forces`]), whose sum drives the equations of motion
//! ([`dynamics`]); the sea current couples through-water and over-ground
//! velocities, and a fixed-step RK4 integrator advances the state.
//! [`measures`] scores predictions against ground truth and [`voyage`] turns
//! logged voyages into aligned validation windows.

pub mod batch;
pub mod config;
pub mod dynamics;
pub mod environment;
pub mod forces;
pub mod geometry;
pub mod harness;
pub mod measures;
pub mod table;
pub mod textio;
pub mod trajectory;
pub mod voyage;

pub use config::{load_config, write_config, Vessel, VesselConfig};
pub use dynamics::{simulate, step, ControlInput, ControlSeries, ShipState};
pub use environment::{EnvironmentSample, EnvironmentSeries};
pub use forces::{ForceBreakdown, ForceTriplet};
pub use measures::{Category, MeasureReport};
pub use trajectory::Trajectory;
