//! Experiment configuration: one JSON document, unknown fields rejected.

use crate::arbitration::ArbiterConfig;
use crate::bci::{ChannelModel, CommandLimits, PilotConfig};
use crate::control::{AttitudeGains, FuzzyPidConfig, PidGains};
use crate::plant::QuadParams;
use crate::track::RunwaySpec;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid config: `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Brain channel only (α fixed at 1).
    Brain,
    /// Autopilot only (α fixed at 0).
    Auto,
    /// Arbitrated shared control.
    Shared,
}

impl RunMode {
    pub fn label(self) -> &'static str {
        match self {
            RunMode::Brain => "BRAIN_ONLY",
            RunMode::Auto => "AUTO_ONLY",
            RunMode::Shared => "SHARED",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RunMode::Brain => "brain",
            RunMode::Auto => "auto",
            RunMode::Shared => "shared",
        })
    }
}

impl FromStr for RunMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brain" => Ok(RunMode::Brain),
            "auto" => Ok(RunMode::Auto),
            "shared" => Ok(RunMode::Shared),
            other => Err(format!("unknown mode `{other}` (expected brain|auto|shared)")),
        }
    }
}

/// How the moving reference point is scheduled along the track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    /// Advance speed along the track (m/s).
    pub speed: f64,
    /// Maximum distance (m) the reference may run ahead of or behind the
    /// vehicle's projected progress.
    pub max_lead: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    /// Outer loop on x and y position error (m → m/s²).
    pub horizontal: FuzzyPidConfig,
    /// Outer loop on height error (m → m/s²).
    pub altitude: FuzzyPidConfig,
    pub attitude: AttitudeGains,
    /// Roll/pitch limit (rad).
    pub tilt_limit: f64,
    /// Cap on the horizontal acceleration demand (m/s²).
    pub max_horizontal_accel: f64,
    /// Autopilot yaw rate per radian of heading error (1/s).
    pub yaw_gain: f64,
    pub max_yaw_rate: f64,
    /// Autopilot climb rate per metre of height-target error (1/s).
    pub climb_gain: f64,
    pub max_climb_rate: f64,
    /// How far the integrated yaw target may lead the vehicle yaw (rad).
    pub yaw_target_window: f64,
    /// How far the integrated height target may lead the vehicle height (m).
    pub altitude_target_window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub accuracy: f64,
    pub recognition_interval: f64,
    pub latency: f64,
}

impl ChannelParams {
    pub fn model(&self, seed: u64) -> ChannelModel {
        ChannelModel {
            accuracy: self.accuracy,
            recognition_interval: self.recognition_interval,
            latency: self.latency,
            seed,
        }
    }
}

/// Regression values fixed after tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionBounds {
    /// Upper bound on AUTO_ONLY RMS cross-track error over one lap (m).
    pub auto_rms_cross_track: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dt: f64,
    /// Upper bound on simulated time (s); a run also stops after one lap.
    pub duration: f64,
    pub seed: u64,
    pub mode: RunMode,
    pub track: RunwaySpec,
    pub reference: ReferenceConfig,
    pub plant: QuadParams,
    pub controller: ControllerConfig,
    pub channel: ChannelParams,
    pub commands: CommandLimits,
    pub pilot: PilotConfig,
    pub arbiter: ArbiterConfig,
    /// Any |position| component (m) or |velocity|/|rate| component beyond
    /// this aborts the run.
    pub divergence_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regression: Option<RegressionBounds>,
}

const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.json");

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_json_str(DEFAULT_CONFIG).expect("shipped default config is valid")
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("must be positive, got {v}")))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("must be nonnegative, got {v}")))
    }
}

fn check_gains(prefix: &str, g: &PidGains) -> Result<(), ConfigError> {
    nonnegative(&format!("{prefix}.kp"), g.kp)?;
    nonnegative(&format!("{prefix}.ki"), g.ki)?;
    nonnegative(&format!("{prefix}.kd"), g.kd)
}

fn check_fuzzy(prefix: &str, c: &FuzzyPidConfig) -> Result<(), ConfigError> {
    check_gains(&format!("{prefix}.base"), &c.base)?;
    check_gains(&format!("{prefix}.delta_scale"), &c.delta_scale)?;
    positive(&format!("{prefix}.error_scale"), c.error_scale)?;
    positive(&format!("{prefix}.rate_scale"), c.rate_scale)?;
    positive(&format!("{prefix}.integral_limit"), c.integral_limit)
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("dt", self.dt)?;
        positive("duration", self.duration)?;
        positive("track.straight_length", self.track.straight_length)?;
        positive("track.arc_length", self.track.arc_length)?;
        if !self.track.altitude.is_finite() {
            return Err(ConfigError::invalid("track.altitude", "must be finite"));
        }
        positive("reference.speed", self.reference.speed)?;
        positive("reference.max_lead", self.reference.max_lead)?;
        self.plant
            .validate()
            .map_err(|m| ConfigError::invalid("plant", m))?;

        let c = &self.controller;
        check_fuzzy("controller.horizontal", &c.horizontal)?;
        check_fuzzy("controller.altitude", &c.altitude)?;
        check_gains("controller.attitude.roll", &c.attitude.roll)?;
        check_gains("controller.attitude.pitch", &c.attitude.pitch)?;
        check_gains("controller.attitude.yaw", &c.attitude.yaw)?;
        positive("controller.attitude.integral_limit", c.attitude.integral_limit)?;
        positive("controller.tilt_limit", c.tilt_limit)?;
        if c.tilt_limit >= 1.2 {
            return Err(ConfigError::invalid(
                "controller.tilt_limit",
                "must stay well below π/2",
            ));
        }
        positive("controller.max_horizontal_accel", c.max_horizontal_accel)?;
        nonnegative("controller.yaw_gain", c.yaw_gain)?;
        positive("controller.max_yaw_rate", c.max_yaw_rate)?;
        nonnegative("controller.climb_gain", c.climb_gain)?;
        positive("controller.max_climb_rate", c.max_climb_rate)?;
        positive("controller.yaw_target_window", c.yaw_target_window)?;
        positive("controller.altitude_target_window", c.altitude_target_window)?;

        if !(0.0..=1.0).contains(&self.channel.accuracy) {
            return Err(ConfigError::invalid("channel.accuracy", "must be in [0, 1]"));
        }
        positive("channel.recognition_interval", self.channel.recognition_interval)?;
        nonnegative("channel.latency", self.channel.latency)?;

        let l = &self.commands;
        nonnegative("commands.pitch", l.pitch)?;
        nonnegative("commands.roll", l.roll)?;
        nonnegative("commands.yaw_rate", l.yaw_rate)?;
        nonnegative("commands.climb_rate", l.climb_rate)?;
        if l.pitch > c.tilt_limit || l.roll > c.tilt_limit {
            return Err(ConfigError::invalid(
                "commands",
                "pitch/roll offsets exceed controller.tilt_limit",
            ));
        }

        positive("pilot.horizon", self.pilot.horizon)?;
        nonnegative("pilot.cruise_speed", self.pilot.cruise_speed)?;

        let a = &self.arbiter;
        nonnegative("arbiter.rho_lo", a.rho_lo)?;
        if !(a.rho_hi > a.rho_lo) {
            return Err(ConfigError::invalid(
                "arbiter.rho_lo",
                format!("must be below arbiter.rho_hi ({} >= {})", a.rho_lo, a.rho_hi),
            ));
        }
        positive("arbiter.rho_hi", a.rho_hi)?;
        positive("arbiter.max_switch_rate", a.max_switch_rate)?;
        let w = &a.weights;
        nonnegative("arbiter.weights.cross_track", w.cross_track)?;
        nonnegative("arbiter.weights.altitude", w.altitude)?;
        nonnegative("arbiter.weights.heading", w.heading)?;
        nonnegative("arbiter.weights.error_rate", w.error_rate)?;

        positive("divergence_bound", self.divergence_bound)?;
        if let Some(r) = &self.regression {
            positive("regression.auto_rms_cross_track", r.auto_rms_cross_track)?;
        }
        Ok(())
    }
}
