//! Simulation of a two-finger parallel gripper driven by three-layer multiple
//! impedance control with optical proximity sensors.
//!
//! The layers provide, from the top, simultaneous contact of both fingers,
//! impact reduction at touch-down and contact force control once grasped.
//! [`scenario::run_scenario`] closes the loop around the [`plant`], and
//! [`sweep`] reproduces the object-position, reflectance and impact studies.

// Validation is written as `!(x > 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod controller;
pub mod error;
pub mod ode;
pub mod output;
pub mod plant;
pub mod scenario;
pub mod sensor;
pub mod sweep;

pub use config::{ScenarioConfig, ScenarioSettings};
pub use controller::{ControlCase, ControllerParams, VirtualInit, VirtualState};
pub use error::{Result, SimError};
pub use plant::{PlantConfig, SimState};
pub use scenario::{run_scenario, run_scenario_streaming, Sample, ScenarioReport};
pub use sensor::{Finger, ObjectGeometry, SensorParams, SurfaceReflectance};
pub use sweep::{Execution, SweepRow};
