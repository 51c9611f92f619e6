use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Rotor speeds in rad/s, X configuration:
/// 0 front-right, 1 rear-left (both spin so their drag yaws +z),
/// 2 front-left, 3 rear-right.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MotorCommands(pub [f64; 4]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorGeometry {
    pub arm_length: f64,
    /// N per (rad/s)².
    pub thrust_coeff: f64,
    /// N·m per (rad/s)².
    pub torque_coeff: f64,
    pub omega_max: f64,
}

/// Body-frame rotor positions as signs of (x, y), and yaw reaction sign.
const LAYOUT: [(f64, f64, f64); 4] = [
    (1.0, -1.0, 1.0),
    (-1.0, 1.0, 1.0),
    (1.0, 1.0, -1.0),
    (-1.0, -1.0, -1.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixOutput {
    pub motors: MotorCommands,
    /// True when any rotor hit 0 or ω_max.
    pub saturated: bool,
}

/// Collective thrust (N) and body torques (N·m) produced by rotor speeds.
pub fn forward_wrench(motors: &MotorCommands, geom: &RotorGeometry) -> (f64, Vector3<f64>) {
    let d = geom.arm_length / SQRT_2;
    let mut thrust = 0.0;
    let mut torque = Vector3::zeros();
    for (w, &(sx, sy, sz)) in motors.0.iter().zip(LAYOUT.iter()) {
        let f = geom.thrust_coeff * w * w;
        thrust += f;
        torque.x += sy * d * f;
        torque.y -= sx * d * f;
        torque.z += sz * geom.torque_coeff * w * w;
    }
    (thrust, torque)
}

/// Inverts `forward_wrench` for squared speeds, clamps to [0, ω_max²].
pub fn mix(thrust: f64, torque: Vector3<f64>, geom: &RotorGeometry) -> MixOutput {
    let d = geom.arm_length / SQRT_2;
    let kf = geom.thrust_coeff;
    let max_sq = geom.omega_max * geom.omega_max;
    let mut saturated = false;
    let mut speeds = [0.0; 4];
    for (speed, &(sx, sy, sz)) in speeds.iter_mut().zip(LAYOUT.iter()) {
        let sq = thrust / (4.0 * kf) + sy * torque.x / (4.0 * kf * d)
            - sx * torque.y / (4.0 * kf * d)
            + sz * torque.z / (4.0 * geom.torque_coeff);
        let clamped = if sq.is_nan() { 0.0 } else { sq.clamp(0.0, max_sq) };
        saturated |= clamped != sq;
        *speed = clamped.sqrt();
    }
    MixOutput {
        motors: MotorCommands(speeds),
        saturated,
    }
}
