//! Runway experiment: closed-loop runs over the stadium circuit and the
//! tracking metrics computed from their telemetry.

mod metrics;
mod sim;
mod telemetry;

pub use metrics::{ProgressTracker, RunMetrics};
pub use sim::{BrainSource, SimError, Simulation, StepEvents, StepOutput};
pub use telemetry::{read_csv, write_csv, TelemetryRow, CSV_COLUMNS};

use crate::config::{ExperimentConfig, RunMode};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<TelemetryRow>,
    pub metrics: RunMetrics,
}

/// Runs one batch experiment with the scripted pilot until the configured
/// duration elapses or the lap completes.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    mode: RunMode,
    seed: u64,
) -> Result<RunOutput, SimError> {
    let mut cfg = cfg.clone();
    cfg.mode = mode;
    cfg.seed = seed;
    let mut sim = Simulation::new(cfg, BrainSource::Scripted)?;
    let mut rows = Vec::with_capacity((sim.config().duration / sim.config().dt) as usize + 1);
    while !sim.finished() {
        rows.push(sim.step(&[])?.row);
    }
    let metrics = RunMetrics::from_rows(&rows, sim.track());
    Ok(RunOutput { rows, metrics })
}
