//! Simulated brain-computer command channel: a nine-symbol vocabulary,
//! a rate-limited and error-prone recognition channel, and a scripted pilot
//! that stands in for the human.

mod channel;
mod command;
mod pilot;

pub use channel::{BciChannel, ChannelEmission, ChannelError, ChannelModel};
pub use command::{command_to_setpoint, BciCommand, CommandLimits, CommandSetpoint};
pub use pilot::{scripted_pilot, PilotConfig, PilotWeights};
