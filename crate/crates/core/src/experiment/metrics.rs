use super::TelemetryRow;
use crate::track::Trajectory;
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

/// Unwrapped arc-length progress of the vehicle around a closed circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgressTracker {
    last_s: Option<f64>,
    /// Signed distance travelled along the track since the first sample.
    pub progress: f64,
    pub max_progress: f64,
    origin: f64,
}

impl ProgressTracker {
    pub fn new() -> Self {
        Self {
            last_s: None,
            progress: 0.0,
            max_progress: 0.0,
            origin: 0.0,
        }
    }

    /// Feeds the next horizontal position; returns the updated progress.
    pub fn update(&mut self, track: &Trajectory, xy: Vector2<f64>) -> f64 {
        let len = track.total_length();
        let s = track.project(xy).s;
        match self.last_s {
            None => self.origin = s,
            Some(prev) => {
                let mut d = (s - prev).rem_euclid(len);
                if d > 0.5 * len {
                    d -= len;
                }
                self.progress += d;
                self.max_progress = self.max_progress.max(self.progress);
            }
        }
        self.last_s = Some(s);
        self.progress
    }

    /// Absolute (unwrapped) arc length, origin included.
    pub fn arc_length(&self) -> f64 {
        self.origin + self.progress
    }

    pub fn completion(&self, track: &Trajectory) -> f64 {
        (self.max_progress / track.total_length()).clamp(0.0, 1.0)
    }
}

impl Default for ProgressTracker {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rms_cross_track: f64,
    pub max_cross_track: f64,
    pub rms_altitude_error: f64,
    pub lap_completion: f64,
    pub mode_switches: u32,
    pub mean_alpha: f64,
    pub steps: usize,
}

impl RunMetrics {
    /// Computes every metric from the telemetry log alone, so a log read
    /// back from CSV reproduces the same values.
    pub fn from_rows(rows: &[TelemetryRow], track: &Trajectory) -> Self {
        if rows.is_empty() {
            return Self {
                rms_cross_track: 0.0,
                max_cross_track: 0.0,
                rms_altitude_error: 0.0,
                lap_completion: 0.0,
                mode_switches: 0,
                mean_alpha: 0.0,
                steps: 0,
            };
        }
        let n = rows.len() as f64;
        let mut sq_xt = 0.0;
        let mut max_xt = 0.0f64;
        let mut sq_alt = 0.0;
        let mut alpha = 0.0;
        let mut switches = 0;
        let mut progress = ProgressTracker::new();
        for (i, r) in rows.iter().enumerate() {
            sq_xt += r.e_xt * r.e_xt;
            max_xt = max_xt.max(r.e_xt.abs());
            let alt = r.z - r.ref_z;
            sq_alt += alt * alt;
            alpha += r.alpha;
            if i > 0 && r.mode != rows[i - 1].mode {
                switches += 1;
            }
            progress.update(track, Vector2::new(r.x, r.y));
        }
        Self {
            rms_cross_track: (sq_xt / n).sqrt(),
            max_cross_track: max_xt,
            rms_altitude_error: (sq_alt / n).sqrt(),
            lap_completion: progress.completion(track),
            mode_switches: switches,
            mean_alpha: alpha / n,
            steps: rows.len(),
        }
    }
}
