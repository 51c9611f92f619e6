use super::{pid_step, AttitudeSetpoint, ControlError, PidGains, PidState};
use crate::plant::{wrap_angle, QuadState};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttitudeGains {
    pub roll: PidGains,
    pub pitch: PidGains,
    pub yaw: PidGains,
    pub integral_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttitudePidState {
    pub roll: PidState,
    pub pitch: PidState,
    pub yaw: PidState,
}

/// Inner loop: independent PIDs on roll, pitch and (wrapped) yaw error,
/// returning body torques in N·m.
pub fn attitude_loop(
    setpoint: &AttitudeSetpoint,
    state: &QuadState,
    gains: &AttitudeGains,
    pid: &AttitudePidState,
    dt: f64,
) -> Result<(Vector3<f64>, AttitudePidState), ControlError> {
    let lim = gains.integral_limit;
    let e_roll = setpoint.roll - state.attitude.x;
    let e_pitch = setpoint.pitch - state.attitude.y;
    let e_yaw = wrap_angle(setpoint.yaw - state.attitude.z);
    let (tx, roll) = pid_step(&gains.roll, &pid.roll, e_roll, dt, lim)?;
    let (ty, pitch) = pid_step(&gains.pitch, &pid.pitch, e_pitch, dt, lim)?;
    let (tz, yaw) = pid_step(&gains.yaw, &pid.yaw, e_yaw, dt, lim)?;
    Ok((Vector3::new(tx, ty, tz), AttitudePidState { roll, pitch, yaw }))
}
