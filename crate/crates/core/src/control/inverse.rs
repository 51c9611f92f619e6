use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Desired attitude (rad) and collective thrust (N).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttitudeSetpoint {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub thrust: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetpointLimits {
    /// Maximum |roll| and |pitch| (rad).
    pub tilt_limit: f64,
    /// Maximum collective thrust (N).
    pub max_thrust: f64,
}

pub fn collective_thrust(accel_z: f64, mass: f64, g: f64, max_thrust: f64) -> f64 {
    (mass * (g + accel_z)).clamp(0.0, max_thrust)
}

/// Small-angle map from a desired inertial acceleration to roll, pitch and
/// thrust, given the current yaw. Frame: ENU world, FLU body, ZYX Euler
/// angles, so positive pitch tips the nose down and accelerates forward.
pub fn inverse_solution(
    accel: Vector3<f64>,
    yaw: f64,
    mass: f64,
    g: f64,
    limits: &SetpointLimits,
) -> AttitudeSetpoint {
    let (s, c) = yaw.sin_cos();
    let tilt = limits.tilt_limit;
    AttitudeSetpoint {
        pitch: ((accel.x * c + accel.y * s) / g).clamp(-tilt, tilt),
        roll: ((accel.x * s - accel.y * c) / g).clamp(-tilt, tilt),
        yaw,
        thrust: collective_thrust(accel.z, mass, g, limits.max_thrust),
    }
}
