//! Six-degree-of-freedom quadrotor rigid body.
//!
//! Conventions: ENU world frame (z up), FLU body frame, ZYX Euler angles
//! (roll φ about body x, pitch θ about body y, yaw ψ about world z, measured
//! counter-clockwise from +x). Body rates are (p, q, r) in the body frame.

use crate::control::{forward_wrench, MotorCommands, RotorGeometry};
use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

const GIMBAL_MARGIN: f64 = 1e-3;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlantError {
    #[error("pitch {0} rad is within 1e-3 of ±π/2; Euler kinematics are singular")]
    GimbalProximity(f64),
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadState {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    /// (roll, pitch, yaw).
    pub attitude: Vector3<f64>,
    /// Body rates (p, q, r).
    pub rates: Vector3<f64>,
}

impl QuadState {
    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn to_array(&self) -> [f64; 12] {
        let mut a = [0.0; 12];
        a[0..3].copy_from_slice(self.position.as_slice());
        a[3..6].copy_from_slice(self.velocity.as_slice());
        a[6..9].copy_from_slice(self.attitude.as_slice());
        a[9..12].copy_from_slice(self.rates.as_slice());
        a
    }

    pub fn from_array(a: &[f64; 12]) -> Self {
        Self {
            position: Vector3::new(a[0], a[1], a[2]),
            velocity: Vector3::new(a[3], a[4], a[5]),
            attitude: Vector3::new(a[6], a[7], a[8]),
            rates: Vector3::new(a[9], a[10], a[11]),
        }
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_euler_angles(self.attitude.x, self.attitude.y, self.attitude.z)
    }

    /// Translational plus rotational kinetic energy plus potential energy.
    pub fn mechanical_energy(&self, p: &QuadParams) -> f64 {
        let w = self.rates;
        let i = p.inertia;
        0.5 * p.mass * self.velocity.norm_squared()
            + p.mass * p.gravity * self.position.z
            + 0.5 * (i.x * w.x * w.x + i.y * w.y * w.y + i.z * w.z * w.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadParams {
    pub mass: f64,
    /// Diagonal of the inertia tensor (kg·m²).
    pub inertia: Vector3<f64>,
    pub arm_length: f64,
    pub thrust_coeff: f64,
    pub torque_coeff: f64,
    pub omega_max: f64,
    pub gravity: f64,
    /// Linear drag (N·s/m).
    pub drag: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            mass: 1.2,
            inertia: Vector3::new(0.015, 0.015, 0.026),
            arm_length: 0.2,
            thrust_coeff: 1.0e-5,
            torque_coeff: 1.6e-7,
            omega_max: 1000.0,
            gravity: 9.81,
            drag: 0.2,
        }
    }
}

impl QuadParams {
    pub fn geometry(&self) -> RotorGeometry {
        RotorGeometry {
            arm_length: self.arm_length,
            thrust_coeff: self.thrust_coeff,
            torque_coeff: self.torque_coeff,
            omega_max: self.omega_max,
        }
    }

    pub fn max_thrust(&self) -> f64 {
        4.0 * self.thrust_coeff * self.omega_max * self.omega_max
    }

    /// Rotor speed at which four rotors exactly carry the weight.
    pub fn hover_speed(&self) -> f64 {
        (self.mass * self.gravity / (4.0 * self.thrust_coeff)).sqrt()
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("mass", self.mass),
            ("inertia.x", self.inertia.x),
            ("inertia.y", self.inertia.y),
            ("inertia.z", self.inertia.z),
            ("arm_length", self.arm_length),
            ("thrust_coeff", self.thrust_coeff),
            ("torque_coeff", self.torque_coeff),
            ("omega_max", self.omega_max),
            ("gravity", self.gravity),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be positive"));
            }
        }
        if !(self.drag >= 0.0 && self.drag.is_finite()) {
            return Err("drag must be nonnegative".into());
        }
        Ok(())
    }
}

/// Time derivative of the state under the given rotor speeds.
pub fn derivative(
    state: &QuadState,
    motors: &MotorCommands,
    p: &QuadParams,
) -> Result<QuadState, PlantError> {
    let (phi, theta, _) = (state.attitude.x, state.attitude.y, state.attitude.z);
    if (theta.abs() - FRAC_PI_2).abs() < GIMBAL_MARGIN {
        return Err(PlantError::GimbalProximity(theta));
    }
    let (thrust, torque) = forward_wrench(motors, &p.geometry());

    let thrust_world = state.rotation() * Vector3::new(0.0, 0.0, thrust);
    let accel = (thrust_world - p.drag * state.velocity) / p.mass
        - Vector3::new(0.0, 0.0, p.gravity);

    let w = state.rates;
    let i = p.inertia;
    let iw = Vector3::new(i.x * w.x, i.y * w.y, i.z * w.z);
    let gyro = w.cross(&iw);
    let w_dot = Vector3::new(
        (torque.x - gyro.x) / i.x,
        (torque.y - gyro.y) / i.y,
        (torque.z - gyro.z) / i.z,
    );

    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    let euler_dot = Vector3::new(
        w.x + (w.y * sp + w.z * cp) * st / ct,
        w.y * cp - w.z * sp,
        (w.y * sp + w.z * cp) / ct,
    );

    Ok(QuadState {
        position: state.velocity,
        velocity: accel,
        attitude: euler_dot,
        rates: w_dot,
    })
}

fn axpy(x: &[f64; 12], k: &[f64; 12], h: f64) -> [f64; 12] {
    std::array::from_fn(|i| x[i] + h * k[i])
}

/// Classic fourth-order Runge–Kutta step with rotor speeds held over `dt`.
pub fn step(
    state: &QuadState,
    motors: &MotorCommands,
    p: &QuadParams,
    dt: f64,
) -> Result<QuadState, PlantError> {
    if !(dt > 0.0) {
        return Err(PlantError::NonPositiveDt(dt));
    }
    let f = |x: &[f64; 12]| derivative(&QuadState::from_array(x), motors, p).map(|d| d.to_array());
    let x0 = state.to_array();
    let k1 = f(&x0)?;
    let k2 = f(&axpy(&x0, &k1, dt / 2.0))?;
    let k3 = f(&axpy(&x0, &k2, dt / 2.0))?;
    let k4 = f(&axpy(&x0, &k3, dt))?;
    let x1: [f64; 12] =
        std::array::from_fn(|i| x0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    let mut next = QuadState::from_array(&x1);
    next.attitude = next.attitude.map(wrap_angle);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hover_motors(p: &QuadParams) -> MotorCommands {
        MotorCommands([p.hover_speed(); 4])
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(0.3 + 4.0 * TAU) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn hover_is_an_equilibrium() {
        let p = QuadParams::default();
        let d = derivative(&QuadState::default(), &hover_motors(&p), &p).unwrap();
        assert!(d.to_array().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_rotors_free_fall() {
        let p = QuadParams::default();
        let d = derivative(&QuadState::default(), &MotorCommands::default(), &p).unwrap();
        assert_eq!(d.velocity, Vector3::new(0.0, 0.0, -p.gravity));
    }

    #[test]
    fn constant_roll_torque_spins_up_linearly() {
        let p = QuadParams::default();
        let geom = p.geometry();
        let tau = 0.01;
        let out = crate::control::mix(p.mass * p.gravity, Vector3::new(tau, 0.0, 0.0), &geom);
        assert!(!out.saturated);
        let mut s = QuadState::default();
        s.position.z = 100.0;
        // Short horizon keeps the gyroscopic coupling terms negligible.
        for _ in 0..10 {
            s = step(&s, &out.motors, &p, 0.01).unwrap();
        }
        assert!((s.rates.x - tau * 0.1 / p.inertia.x).abs() < 1e-9);
    }

    #[test]
    fn gimbal_proximity_is_reported() {
        let p = QuadParams::default();
        let mut s = QuadState::default();
        s.attitude.y = FRAC_PI_2 - 5e-4;
        assert!(matches!(
            derivative(&s, &hover_motors(&p), &p),
            Err(PlantError::GimbalProximity(_))
        ));
        assert!(step(&s, &hover_motors(&p), &p, 0.01).is_err());
    }

    #[test]
    fn bit_identical_replay() {
        let p = QuadParams::default();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut s = QuadState::default();
            for _ in 0..500 {
                let w = std::array::from_fn(|_| p.hover_speed() * rng.random_range(0.98..1.02));
                s = step(&s, &MotorCommands(w), &p, 0.01).unwrap();
            }
            s.to_array().map(f64::to_bits)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn energy_conserved_without_drag_or_thrust() {
        let p = QuadParams {
            drag: 0.0,
            ..QuadParams::default()
        };
        let mut s = QuadState::default();
        s.position.z = 200.0;
        s.velocity = Vector3::new(1.0, -2.0, 3.0);
        s.rates = Vector3::new(0.3, -0.2, 0.5);
        let e0 = s.mechanical_energy(&p);
        for _ in 0..100 {
            s = step(&s, &MotorCommands::default(), &p, 0.01).unwrap();
        }
        let drift = ((s.mechanical_energy(&p) - e0) / e0).abs();
        assert!(drift < 1e-6, "relative drift {drift}");
    }
}
