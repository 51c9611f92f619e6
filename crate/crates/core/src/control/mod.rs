//! Dual-loop cascade: fuzzy-adaptive position loop, inverse solution to an
//! attitude/thrust setpoint, conventional attitude PID and X-quad mixing.

mod attitude;
mod fuzzy_pid;
mod inverse;
mod mixer;
mod pid;

pub use attitude::{attitude_loop, AttitudeGains, AttitudePidState};
pub use fuzzy_pid::{fuzzy_pid_step, FuzzyPidConfig};
pub use inverse::{collective_thrust, inverse_solution, AttitudeSetpoint, SetpointLimits};
pub use mixer::{forward_wrench, mix, MixOutput, MotorCommands, RotorGeometry};
pub use pid::{pid_step, PidGains, PidState};

use crate::fuzzy::FuzzyError;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ControlError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
}
