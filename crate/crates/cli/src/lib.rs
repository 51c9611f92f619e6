//! Command-line and live-mode front end for the sharedpilot simulator.

pub mod commands;
pub mod serve;
pub mod wire;
