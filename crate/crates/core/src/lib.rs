//! Shared-control quadrotor simulator.
//!
//! A fuzzy-adaptive cascade autopilot and a simulated, rate-limited and
//! error-prone brain-computer command channel fly the same vehicle; an
//! arbiter scores the flight status and blends their setpoints.
//!
//! Module map:
//! - [`fuzzy`]: Mamdani gain scheduling from the Kp/Ki/Kd rule tables
//! - [`control`]: PID, fuzzy PID, inverse solution, attitude loop, mixer
//! - [`plant`]: 6-DOF rigid body and RK4 stepping
//! - [`bci`]: command vocabulary, noisy channel, scripted pilot
//! - [`arbitration`]: flight-status risk, hysteresis arbiter, blending
//! - [`track`] and [`experiment`]: runway circuit, closed-loop runs, metrics
//! - [`config`]: the JSON experiment configuration

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arbitration;
pub mod bci;
pub mod config;
pub mod control;
pub mod experiment;
pub mod fuzzy;
pub mod plant;
pub mod track;

pub use config::{ExperimentConfig, RunMode};
pub use experiment::{run_experiment, RunMetrics, RunOutput, SimError, Simulation};
