//! JSON messages exchanged over the live-mode WebSocket.
//!
//! Every message is an object with a `type` tag and a `seq` number. Each
//! direction of a connection numbers its own messages; the server rejects
//! inbound messages whose `seq` does not increase.

use serde::{Deserialize, Serialize};
use sharedpilot::bci::{BciCommand, ChannelEmission};
use sharedpilot::experiment::{StepEvents, TelemetryRow};
use sharedpilot::RunMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    /// Server to client: one decimated simulation snapshot.
    Telemetry {
        seq: u64,
        #[serde(flatten)]
        snapshot: Box<TelemetrySnapshot>,
    },
    /// Client to server: one operator intent.
    Command {
        seq: u64,
        command: BciCommand,
        /// Informational only; the server stamps intents on arrival.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        client_time: Option<f64>,
    },
    /// Client to server: session management.
    Control { seq: u64, control: ControlAction },
    Ack {
        seq: u64,
        /// `seq` of the client message being acknowledged, if any.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        re: Option<u64>,
        text: String,
    },
    Error {
        seq: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        re: Option<u64>,
        text: String,
    },
    /// Server to client: telemetry was dropped because the client fell
    /// behind; `dropped` snapshots are missing before the next one.
    Gap { seq: u64, dropped: u64 },
}

impl WireMessage {
    pub fn seq(&self) -> u64 {
        match self {
            WireMessage::Telemetry { seq, .. }
            | WireMessage::Command { seq, .. }
            | WireMessage::Control { seq, .. }
            | WireMessage::Ack { seq, .. }
            | WireMessage::Error { seq, .. }
            | WireMessage::Gap { seq, .. } => *seq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum ControlAction {
    Start,
    Pause,
    Reset,
    SetMode { mode: RunMode },
}

/// Channel activity accumulated since the previous snapshot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub emitted: Vec<ChannelEmission>,
    /// Intents refused because they arrived inside the recognition interval.
    pub dropped: Vec<BciCommand>,
    pub delivered: Vec<ChannelEmission>,
}

impl ChannelReport {
    pub fn absorb(&mut self, events: StepEvents) {
        self.emitted.extend(events.emitted);
        self.dropped.extend(events.dropped);
        self.delivered.extend(events.delivered);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelemetrySnapshot {
    pub step: u64,
    pub run_mode: RunMode,
    #[serde(flatten)]
    pub row: TelemetryRow,
    pub channel: ChannelReport,
}
