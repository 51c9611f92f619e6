use crate::arbitration::AuthorityMode;
use crate::bci::BciCommand;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

/// Column order of the telemetry CSV.
pub const CSV_COLUMNS: [&str; 23] = [
    "t", "x", "y", "z", "roll", "pitch", "yaw", "ref_x", "ref_y", "ref_z", "e_xt", "rho", "alpha",
    "mode", "cmd", "kp_eff", "ki_eff", "kd_eff", "m1", "m2", "m3", "m4", "saturated",
];

/// One simulation step. Field order is the CSV column order.
///
/// `cmd` is the brain command currently held by the channel; the effective
/// gains are those of the x-axis outer loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub ref_x: f64,
    pub ref_y: f64,
    pub ref_z: f64,
    pub e_xt: f64,
    pub rho: f64,
    pub alpha: f64,
    pub mode: AuthorityMode,
    pub cmd: BciCommand,
    pub kp_eff: f64,
    pub ki_eff: f64,
    pub kd_eff: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub saturated: u8,
}

pub fn write_csv<W: Write>(rows: &[TelemetryRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TelemetryRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}
