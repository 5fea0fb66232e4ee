//! Planar poses, angle helpers and oriented-rectangle overlap.

use serde::{Deserialize, Serialize};

/// A 2-D point serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(p: [f64; 2]) -> Self {
        Self { x: p[0], y: p[1] }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// Position and heading of a body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading }
    }

    /// Expresses the world point `(x, y)` in this body's frame.
    pub fn to_local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.heading.sin_cos();
        let (dx, dy) = (x - self.x, y - self.y);
        (c * dx + s * dy, -s * dx + c * dy)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Rectangle centred at `(x, y)` with its length axis along `heading`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedRect {
    pub fn new(x: f64, y: f64, heading: f64, length: f64, width: f64) -> Self {
        Self {
            x,
            y,
            heading,
            length,
            width,
        }
    }

    fn axes(&self) -> [(f64, f64); 2] {
        let (s, c) = self.heading.sin_cos();
        [(c, s), (-s, c)]
    }

    /// Half-extent of the rectangle projected onto a unit axis.
    fn projected_radius(&self, axis: (f64, f64)) -> f64 {
        let [u, v] = self.axes();
        0.5 * self.length * (u.0 * axis.0 + u.1 * axis.1).abs()
            + 0.5 * self.width * (v.0 * axis.0 + v.1 * axis.1).abs()
    }

    /// Separating-axis overlap test. Closed sets: touching edges overlap.
    pub fn overlaps(&self, other: &OrientedRect) -> bool {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        let [a0, a1] = self.axes();
        let [b0, b1] = other.axes();
        for axis in [a0, a1, b0, b1] {
            let dist = (dx * axis.0 + dy * axis.1).abs();
            let reach = self.projected_radius(axis) + other.projected_radius(axis);
            // Tolerance absorbs rounding in the projections for exact contact.
            if dist > reach + 1e-9 {
                return false;
            }
        }
        true
    }
}
