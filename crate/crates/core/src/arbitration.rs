//! Shared-control arbiter: scores the flight status and decides how much
//! authority the brain channel keeps versus the autopilot.

use crate::bci::CommandSetpoint;
use crate::plant::{wrap_angle, QuadState};
use crate::track::Trajectory;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Slack on the switch-spacing comparison for sampled clock times.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ArbitrationError {
    #[error("thresholds must satisfy rho_hi > rho_lo >= 0 and max_switch_rate > 0 (got lo={lo}, hi={hi}, rate={rate})")]
    BadThresholds { lo: f64, hi: f64, rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskWeights {
    pub cross_track: f64,
    pub altitude: f64,
    pub heading: f64,
    pub error_rate: f64,
}

impl Default for RiskWeights {
    fn default() -> Self {
        Self {
            cross_track: 1.0,
            altitude: 1.0,
            heading: 0.5,
            error_rate: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArbiterConfig {
    pub rho_lo: f64,
    pub rho_hi: f64,
    /// Maximum mode switches per second.
    pub max_switch_rate: f64,
    pub weights: RiskWeights,
}

impl Default for ArbiterConfig {
    fn default() -> Self {
        Self {
            rho_lo: 1.0,
            rho_hi: 3.0,
            max_switch_rate: 0.5,
            weights: RiskWeights::default(),
        }
    }
}

impl ArbiterConfig {
    pub fn validate(&self) -> Result<(), ArbitrationError> {
        let ok = self.rho_lo >= 0.0
            && self.rho_hi > self.rho_lo
            && self.rho_hi.is_finite()
            && self.max_switch_rate > 0.0;
        if ok {
            Ok(())
        } else {
            Err(ArbitrationError::BadThresholds {
                lo: self.rho_lo,
                hi: self.rho_hi,
                rate: self.max_switch_rate,
            })
        }
    }

    pub fn min_switch_interval(&self) -> f64 {
        1.0 / self.max_switch_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlightStatus {
    pub cross_track: f64,
    pub altitude_error: f64,
    pub heading_error: f64,
    /// Rate of change of the cross-track error (m/s).
    pub error_rate: f64,
    pub risk: f64,
}

impl FlightStatus {
    pub fn from_errors(
        cross_track: f64,
        altitude_error: f64,
        heading_error: f64,
        error_rate: f64,
        w: &RiskWeights,
    ) -> Self {
        let risk = w.cross_track * cross_track.abs()
            + w.altitude * altitude_error.abs()
            + w.heading * heading_error.abs()
            + w.error_rate * error_rate.abs();
        Self {
            cross_track,
            altitude_error,
            heading_error,
            error_rate,
            risk,
        }
    }
}

/// Error components relative to the nearest track point and the composite
/// risk score. With no previous status the error rate is zero.
pub fn evaluate_status(
    state: &QuadState,
    track: &Trajectory,
    prev: Option<&FlightStatus>,
    dt: f64,
    weights: &RiskWeights,
) -> FlightStatus {
    let proj = track.project(state.position.xy());
    let rate = match prev {
        Some(p) if dt > 0.0 => (proj.cross_track - p.cross_track) / dt,
        _ => 0.0,
    };
    FlightStatus::from_errors(
        proj.cross_track,
        state.position.z - track.altitude(),
        wrap_angle(proj.heading - state.attitude.z),
        rate,
        weights,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AuthorityMode {
    Brain,
    Auto,
    Blend,
}

impl AuthorityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AuthorityMode::Brain => "BRAIN",
            AuthorityMode::Auto => "AUTO",
            AuthorityMode::Blend => "BLEND",
        }
    }
}

impl fmt::Display for AuthorityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AuthorityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "BRAIN" => Ok(AuthorityMode::Brain),
            "AUTO" => Ok(AuthorityMode::Auto),
            "BLEND" => Ok(AuthorityMode::Blend),
            other => Err(format!("unknown authority mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuthorityState {
    /// Brain weight: 1 is full brain authority, 0 full autopilot.
    pub alpha: f64,
    /// Rate-limited mode label.
    pub mode: AuthorityMode,
    /// Hysteresis regime before rate limiting; drives `alpha`.
    pub regime: AuthorityMode,
    pub last_switch: Option<f64>,
    pub switch_count: u32,
}

impl AuthorityState {
    pub fn brain() -> Self {
        Self {
            alpha: 1.0,
            mode: AuthorityMode::Brain,
            regime: AuthorityMode::Brain,
            last_switch: None,
            switch_count: 0,
        }
    }

    pub fn auto() -> Self {
        Self {
            alpha: 0.0,
            mode: AuthorityMode::Auto,
            regime: AuthorityMode::Auto,
            last_switch: None,
            switch_count: 0,
        }
    }
}

impl Default for AuthorityState {
    fn default() -> Self {
        Self::brain()
    }
}

/// Two-threshold hysteresis with a linear blend band and a cap on how
/// often the mode label may change.
pub fn arbitrate(
    status: &FlightStatus,
    auth: &AuthorityState,
    t: f64,
    cfg: &ArbiterConfig,
) -> Result<AuthorityState, ArbitrationError> {
    cfg.validate()?;
    let rho = status.risk;
    let (lo, hi) = (cfg.rho_lo, cfg.rho_hi);
    let regime = if rho >= hi || rho.is_nan() {
        AuthorityMode::Auto
    } else if rho <= lo {
        AuthorityMode::Brain
    } else if auth.regime == AuthorityMode::Auto {
        AuthorityMode::Auto
    } else {
        AuthorityMode::Blend
    };
    let alpha = match regime {
        AuthorityMode::Auto => 0.0,
        AuthorityMode::Brain => 1.0,
        AuthorityMode::Blend => ((hi - rho) / (hi - lo)).clamp(0.0, 1.0),
    };

    let mut next = AuthorityState {
        alpha,
        regime,
        ..*auth
    };
    if regime != auth.mode {
        let allowed = auth
            .last_switch
            .is_none_or(|last| t - last >= cfg.min_switch_interval() - TIME_EPS);
        if allowed {
            next.mode = regime;
            next.last_switch = Some(t);
            next.switch_count += 1;
        }
    }
    Ok(next)
}

/// Per-field convex combination `alpha * brain + (1 - alpha) * auto`.
pub fn blend(brain: &CommandSetpoint, auto: &CommandSetpoint, alpha: f64) -> CommandSetpoint {
    let a = alpha.clamp(0.0, 1.0);
    let mix = |b: f64, c: f64| a * b + (1.0 - a) * c;
    CommandSetpoint {
        pitch: mix(brain.pitch, auto.pitch),
        roll: mix(brain.roll, auto.roll),
        yaw_rate: mix(brain.yaw_rate, auto.yaw_rate),
        vertical_velocity: mix(brain.vertical_velocity, auto.vertical_velocity),
    }
}
