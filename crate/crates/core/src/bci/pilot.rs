use super::{command_to_setpoint, BciCommand, CommandLimits};
use crate::plant::{wrap_angle, QuadParams, QuadState};
use crate::track::Trajectory;
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotWeights {
    pub cross_track: f64,
    pub heading: f64,
    pub altitude: f64,
}

/// Greedy one-command lookahead policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotConfig {
    /// Prediction horizon (s).
    pub horizon: f64,
    pub weights: PilotWeights,
    /// Errors at or below these values count as "on track".
    pub deadband: PilotWeights,
    /// Inside the deadband the pilot pushes FORWARD below this speed and
    /// issues HOVER above it (m/s).
    pub cruise_speed: f64,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self {
            horizon: 1.5,
            weights: PilotWeights {
                cross_track: 1.0,
                heading: 4.0,
                altitude: 1.0,
            },
            deadband: PilotWeights {
                cross_track: 0.5,
                heading: 0.1,
                altitude: 0.3,
            },
            cruise_speed: 5.0,
        }
    }
}

struct Errors {
    cross_track: f64,
    heading: f64,
    altitude: f64,
}

fn errors_at(track: &Trajectory, p: Vector2<f64>, yaw: f64, z: f64) -> Errors {
    let proj = track.project(p);
    Errors {
        cross_track: proj.cross_track.abs(),
        heading: wrap_angle(proj.heading - yaw).abs(),
        altitude: (z - track.altitude()).abs(),
    }
}

/// Picks the command whose held effect over the horizon minimizes the
/// weighted error sum. Ties go to the earlier command in vocabulary order.
pub fn scripted_pilot(
    state: &QuadState,
    track: &Trajectory,
    cfg: &PilotConfig,
    limits: &CommandLimits,
    params: &QuadParams,
) -> BciCommand {
    let yaw = state.attitude.z;
    let p = state.position.xy();
    let v = state.velocity.xy();
    let now = errors_at(track, p, yaw, state.position.z);
    let db = &cfg.deadband;
    if now.cross_track <= db.cross_track && now.heading <= db.heading && now.altitude <= db.altitude
    {
        let forward_speed = v.dot(&Vector2::new(yaw.cos(), yaw.sin()));
        return if forward_speed < cfg.cruise_speed {
            BciCommand::Forward
        } else {
            BciCommand::Hover
        };
    }

    let h = cfg.horizon;
    let g = params.gravity;
    let drag_rate = params.drag / params.mass;
    let (sy, cy) = yaw.sin_cos();
    let w = &cfg.weights;
    let mut best = (f64::INFINITY, BciCommand::Hover);
    for cmd in BciCommand::ALL {
        let sp = command_to_setpoint(cmd, limits);
        let (roll, pitch) = sp.plant_tilt();
        // Small-angle body acceleration (FLU), rotated into the world frame.
        let (ax_b, ay_b) = (g * pitch, -g * roll);
        let accel = Vector2::new(cy * ax_b - sy * ay_b, sy * ax_b + cy * ay_b) - v * drag_rate;
        let p_next = p + v * h + accel * (0.5 * h * h);
        let yaw_next = yaw + sp.yaw_rate * h;
        let z_next = state.position.z + sp.vertical_velocity * h;
        let e = errors_at(track, p_next, yaw_next, z_next);
        let cost = w.cross_track * e.cross_track + w.heading * e.heading + w.altitude * e.altitude;
        if cost < best.0 {
            best = (cost, cmd);
        }
    }
    best.1
}
