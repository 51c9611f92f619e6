use super::ControlError;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }
}

/// Integrator and derivative memory of one PID channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: Option<f64>,
}

impl PidState {
    /// Backward-difference error rate; zero on the first sample.
    pub fn error_rate(&self, error: f64, dt: f64) -> f64 {
        self.prev_error.map_or(0.0, |prev| (error - prev) / dt)
    }
}

/// One PID update. The integral accumulates `error * dt` before the output
/// is formed and is clamped to `±integral_limit`.
pub fn pid_step(
    gains: &PidGains,
    state: &PidState,
    error: f64,
    dt: f64,
    integral_limit: f64,
) -> Result<(f64, PidState), ControlError> {
    if !(dt > 0.0) {
        return Err(ControlError::NonPositiveDt(dt));
    }
    let derivative = state.error_rate(error, dt);
    let integral = (state.integral + error * dt).clamp(-integral_limit, integral_limit);
    let output = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    Ok((
        output,
        PidState {
            integral,
            prev_error: Some(error),
        },
    ))
}
