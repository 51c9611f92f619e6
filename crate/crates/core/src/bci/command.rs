use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The recognizable command vocabulary, in tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BciCommand {
    Forward,
    Back,
    Left,
    Right,
    Ascend,
    Descend,
    YawLeft,
    YawRight,
    Hover,
}

impl BciCommand {
    pub const ALL: [BciCommand; 9] = [
        BciCommand::Forward,
        BciCommand::Back,
        BciCommand::Left,
        BciCommand::Right,
        BciCommand::Ascend,
        BciCommand::Descend,
        BciCommand::YawLeft,
        BciCommand::YawRight,
        BciCommand::Hover,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BciCommand::Forward => "FORWARD",
            BciCommand::Back => "BACK",
            BciCommand::Left => "LEFT",
            BciCommand::Right => "RIGHT",
            BciCommand::Ascend => "ASCEND",
            BciCommand::Descend => "DESCEND",
            BciCommand::YawLeft => "YAW_LEFT",
            BciCommand::YawRight => "YAW_RIGHT",
            BciCommand::Hover => "HOVER",
        }
    }
}

impl fmt::Display for BciCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BciCommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// Magnitudes a single command injects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandLimits {
    /// Pitch offset for FORWARD/BACK (rad).
    pub pitch: f64,
    /// Roll offset for LEFT/RIGHT (rad).
    pub roll: f64,
    /// Yaw rate for YAW_LEFT/YAW_RIGHT (rad/s).
    pub yaw_rate: f64,
    /// Vertical speed for ASCEND/DESCEND (m/s).
    pub climb_rate: f64,
}

impl Default for CommandLimits {
    fn default() -> Self {
        Self {
            pitch: 0.1,
            roll: 0.1,
            yaw_rate: 0.3,
            climb_rate: 0.5,
        }
    }
}

/// Attitude-level setpoint shared by the brain and autopilot paths.
///
/// Pilot-facing signs: `pitch` is nose-up positive (so FORWARD is negative),
/// `roll` is right-wing-down positive, `yaw_rate` is counter-clockwise
/// positive and `vertical_velocity` is up positive.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CommandSetpoint {
    pub pitch: f64,
    pub roll: f64,
    pub yaw_rate: f64,
    pub vertical_velocity: f64,
}

impl CommandSetpoint {
    /// (roll, pitch) in plant Euler convention, where positive pitch is
    /// nose down.
    pub fn plant_tilt(&self) -> (f64, f64) {
        (self.roll, -self.pitch)
    }

    /// Inverse of `plant_tilt` for the tilt fields.
    pub fn from_plant_tilt(roll: f64, pitch: f64) -> Self {
        Self {
            pitch: -pitch,
            roll,
            ..Self::default()
        }
    }
}

pub fn command_to_setpoint(cmd: BciCommand, limits: &CommandLimits) -> CommandSetpoint {
    let mut sp = CommandSetpoint::default();
    match cmd {
        BciCommand::Forward => sp.pitch = -limits.pitch,
        BciCommand::Back => sp.pitch = limits.pitch,
        BciCommand::Left => sp.roll = -limits.roll,
        BciCommand::Right => sp.roll = limits.roll,
        BciCommand::Ascend => sp.vertical_velocity = limits.climb_rate,
        BciCommand::Descend => sp.vertical_velocity = -limits.climb_rate,
        BciCommand::YawLeft => sp.yaw_rate = limits.yaw_rate,
        BciCommand::YawRight => sp.yaw_rate = -limits.yaw_rate,
        BciCommand::Hover => {}
    }
    sp
}
