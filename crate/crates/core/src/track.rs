//! Closed reference circuits made of straight and circular segments, with
//! arc-length lookup and nearest-point projection.

use crate::plant::wrap_angle;
use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TrackError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Turn {
    Left,
    Right,
}

impl Turn {
    fn sign(self) -> f64 {
        match self {
            Turn::Left => 1.0,
            Turn::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Straight {
        start: Vector2<f64>,
        heading: f64,
        length: f64,
    },
    Arc {
        start: Vector2<f64>,
        heading: f64,
        length: f64,
        radius: f64,
        turn: Turn,
    },
}

fn unit(heading: f64) -> Vector2<f64> {
    Vector2::new(heading.cos(), heading.sin())
}

impl Segment {
    pub fn length(&self) -> f64 {
        match *self {
            Segment::Straight { length, .. } | Segment::Arc { length, .. } => length,
        }
    }

    /// Position and (unwrapped) tangent heading at arc length `u` into the segment.
    pub fn pose_at(&self, u: f64) -> (Vector2<f64>, f64) {
        match *self {
            Segment::Straight { start, heading, .. } => (start + unit(heading) * u, heading),
            Segment::Arc {
                start,
                heading,
                radius,
                turn,
                ..
            } => {
                let k = turn.sign();
                let center = start + unit(heading + k * FRAC_PI_2) * radius;
                let angle0 = heading - k * FRAC_PI_2;
                let swept = k * u / radius;
                (center + unit(angle0 + swept) * radius, heading + swept)
            }
        }
    }

    pub fn end_pose(&self) -> (Vector2<f64>, f64) {
        self.pose_at(self.length())
    }

    /// Arc length of the point on this segment nearest to `p`.
    fn nearest_u(&self, p: Vector2<f64>) -> f64 {
        match *self {
            Segment::Straight {
                start,
                heading,
                length,
            } => (p - start).dot(&unit(heading)).clamp(0.0, length),
            Segment::Arc {
                start,
                heading,
                length,
                radius,
                turn,
            } => {
                let k = turn.sign();
                let center = start + unit(heading + k * FRAC_PI_2) * radius;
                let angle0 = heading - k * FRAC_PI_2;
                let d = p - center;
                let beta = d.y.atan2(d.x);
                let swept = (k * (beta - angle0)).rem_euclid(TAU);
                let span = length / radius;
                if swept <= span {
                    swept * radius
                } else if swept - span < TAU - swept {
                    length
                } else {
                    0.0
                }
            }
        }
    }
}

/// Nearest-point projection of a horizontal position onto the circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackProjection {
    /// Arc length of the nearest point, in [0, total length).
    pub s: f64,
    pub point: Vector2<f64>,
    /// Tangent heading at the nearest point, wrapped to (−π, π].
    pub heading: f64,
    /// Signed lateral offset, positive to the right of the direction of travel.
    pub cross_track: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoint {
    pub position: Vector3<f64>,
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    segments: Vec<Segment>,
    offsets: Vec<f64>,
    altitude: f64,
    total_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunwaySpec {
    pub straight_length: f64,
    pub arc_length: f64,
    pub altitude: f64,
}

impl Default for RunwaySpec {
    fn default() -> Self {
        Self {
            straight_length: 200.0,
            arc_length: 157.0,
            altitude: 5.0,
        }
    }
}

impl RunwaySpec {
    pub fn build(&self) -> Result<Trajectory, TrackError> {
        build_runway(self.straight_length, self.arc_length, self.altitude)
    }
}

/// Stadium circuit starting at the origin heading +x: straight, left
/// semicircle, straight back, left semicircle.
pub fn build_runway(
    straight_length: f64,
    arc_length: f64,
    altitude: f64,
) -> Result<Trajectory, TrackError> {
    if !(straight_length > 0.0) {
        return Err(TrackError::NonPositive("straight_length"));
    }
    if !(arc_length > 0.0) {
        return Err(TrackError::NonPositive("arc_length"));
    }
    let radius = arc_length / PI;
    let mut segments = Vec::with_capacity(4);
    let (mut pos, mut heading) = (Vector2::zeros(), 0.0);
    for i in 0..4 {
        let seg = if i % 2 == 0 {
            Segment::Straight {
                start: pos,
                heading,
                length: straight_length,
            }
        } else {
            Segment::Arc {
                start: pos,
                heading,
                length: arc_length,
                radius,
                turn: Turn::Left,
            }
        };
        (pos, heading) = seg.end_pose();
        segments.push(seg);
    }
    Ok(Trajectory::from_segments(segments, altitude))
}

impl Trajectory {
    pub fn from_segments(segments: Vec<Segment>, altitude: f64) -> Self {
        let mut offsets = Vec::with_capacity(segments.len());
        let mut total = 0.0;
        for s in &segments {
            offsets.push(total);
            total += s.length();
        }
        Self {
            segments,
            offsets,
            altitude,
            total_length: total,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    /// Reference point at arc length `s`, wrapped modulo the circuit length.
    pub fn reference_at(&self, s: f64) -> ReferencePoint {
        let s = s.rem_euclid(self.total_length);
        let i = self
            .offsets
            .partition_point(|&o| o <= s)
            .saturating_sub(1);
        let (p, h) = self.segments[i].pose_at(s - self.offsets[i]);
        ReferencePoint {
            position: Vector3::new(p.x, p.y, self.altitude),
            heading: wrap_angle(h),
        }
    }

    pub fn project(&self, p: Vector2<f64>) -> TrackProjection {
        let mut best: Option<(f64, TrackProjection)> = None;
        for (seg, &offset) in self.segments.iter().zip(&self.offsets) {
            let u = seg.nearest_u(p);
            let (q, h) = seg.pose_at(u);
            let dist = (p - q).norm();
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                let right = Vector2::new(h.sin(), -h.cos());
                best = Some((
                    dist,
                    TrackProjection {
                        s: (offset + u).rem_euclid(self.total_length),
                        point: q,
                        heading: wrap_angle(h),
                        cross_track: (p - q).dot(&right),
                    },
                ));
            }
        }
        best.expect("trajectory has at least one segment").1
    }

    pub fn cross_track_error(&self, position: &Vector3<f64>) -> f64 {
        self.project(position.xy()).cross_track
    }
}
