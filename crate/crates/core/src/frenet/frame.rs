//! Road-aligned coordinates over a smoothed reference line.
//!
//! The reference polyline is interpolated by a natural cubic spline in its
//! chord-length parameter and re-parameterized by true arc length through a
//! tabulated integral. Beyond either end the frame continues along the end
//! tangent with zero curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Point2};

/// Abscissae and weights of the 8-point Gauss-Legendre rule on [-1, 1].
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_48),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Target spacing of the arc-length table (m).
const TABLE_SPACING: f64 = 0.5;

#[derive(Debug, Clone)]
struct Spline1 {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl Spline1 {
    /// Natural cubic spline through `(knots[i], values[i])`.
    fn natural(knots: &[f64], values: &[f64]) -> Self {
        let n = knots.len();
        let mut second = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior second-derivative system.
            let m = n - 2;
            let mut diag = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            let mut upper = vec![0.0; m];
            for i in 0..m {
                let h0 = knots[i + 1] - knots[i];
                let h1 = knots[i + 2] - knots[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] =
                    6.0 * ((values[i + 2] - values[i + 1]) / h1 - (values[i + 1] - values[i]) / h0);
            }
            for i in 1..m {
                let lower = knots[i + 1] - knots[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            second[m] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                second[i + 1] = (rhs[i] - upper[i] * second[i + 2]) / diag[i];
            }
        }
        Self {
            knots: knots.to_vec(),
            values: values.to_vec(),
            second,
        }
    }

    /// Value and first three derivatives at `u` inside the knot range.
    fn eval(&self, u: f64) -> [f64; 4] {
        let n = self.knots.len();
        let i = self.knots[1..n - 1].partition_point(|&k| k <= u);
        let (u0, u1) = (self.knots[i], self.knots[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let h = u1 - u0;
        let a = (u1 - u) / h;
        let b = (u - u0) / h;
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d1 =
            (y1 - y0) / h - (3.0 * a * a - 1.0) * h / 6.0 * m0 + (3.0 * b * b - 1.0) * h / 6.0 * m1;
        let d2 = a * m0 + b * m1;
        let d3 = (m1 - m0) / h;
        [value, d1, d2, d3]
    }
}

/// Reference-line geometry at one arc length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPoint {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub curvature: f64,
    /// Derivative of curvature with respect to arc length.
    pub curvature_rate: f64,
}

/// Kinematic state in road coordinates with time derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrenetState {
    pub s: f64,
    pub s_d: f64,
    pub s_dd: f64,
    pub d: f64,
    pub d_d: f64,
    pub d_dd: f64,
}

/// Cartesian pose and kinematics derived from a [`FrenetState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    /// Tangential acceleration.
    pub a: f64,
    /// Acceleration normal to the direction of travel.
    pub lat_acc: f64,
}

#[derive(Debug, Clone)]
pub struct FrenetFrame {
    x: Spline1,
    y: Spline1,
    /// (chord parameter, arc length) samples.
    table: Vec<(f64, f64)>,
    /// Cartesian positions of the table samples.
    table_xy: Vec<(f64, f64)>,
    length: f64,
}

impl FrenetFrame {
    pub fn new(reference_line: &[Point2]) -> Result<Self> {
        if reference_line.len() < 2 {
            return Err(Error::validation(
                "reference_line",
                "needs at least two points",
            ));
        }
        let mut knots = Vec::with_capacity(reference_line.len());
        knots.push(0.0);
        for (i, w) in reference_line.windows(2).enumerate() {
            let chord = w[0].distance(&w[1]);
            if !(chord > 1e-9) {
                return Err(Error::validation(
                    format!("reference_line[{}]", i + 1),
                    "repeated point; arc length must strictly increase",
                ));
            }
            knots.push(knots[i] + chord);
        }
        let xs: Vec<f64> = reference_line.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = reference_line.iter().map(|p| p.y).collect();
        let x = Spline1::natural(&knots, &xs);
        let y = Spline1::natural(&knots, &ys);

        let mut frame = FrenetFrame {
            x,
            y,
            table: Vec::new(),
            table_xy: Vec::new(),
            length: 0.0,
        };
        let mut table = vec![(0.0, 0.0)];
        let mut s = 0.0;
        for w in knots.windows(2) {
            let pieces = ((w[1] - w[0]) / TABLE_SPACING).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / pieces as f64;
            for p in 0..pieces {
                let u0 = w[0] + p as f64 * h;
                let u1 = if p + 1 == pieces { w[1] } else { u0 + h };
                s += frame.speed_integral(u0, u1);
                table.push((u1, s));
            }
        }
        frame.length = s;
        frame.table_xy = table
            .iter()
            .map(|&(u, _)| (frame.x.eval(u)[0], frame.y.eval(u)[0]))
            .collect();
        frame.table = table;
        Ok(frame)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    fn derivs(&self, u: f64) -> ([f64; 4], [f64; 4]) {
        (self.x.eval(u), self.y.eval(u))
    }

    fn param_speed(&self, u: f64) -> f64 {
        let (x, y) = self.derivs(u);
        x[1].hypot(y[1])
    }

    fn speed_integral(&self, u0: f64, u1: f64) -> f64 {
        let half = 0.5 * (u1 - u0);
        let mid = 0.5 * (u1 + u0);
        GL8.iter()
            .map(|&(xi, w)| w * self.param_speed(mid + half * xi))
            .sum::<f64>()
            * half
    }

    /// Chord parameter at arc length `s`, for `s` in `[0, length]`.
    fn param_at(&self, s: f64) -> f64 {
        let j = self.table[1..]
            .partition_point(|&(_, sj)| sj < s)
            .min(self.table.len() - 2);
        let (u0, s0) = self.table[j];
        let (u1, s1) = self.table[j + 1];
        let mut u = u0 + (u1 - u0) * (s - s0) / (s1 - s0);
        for _ in 0..8 {
            let err = s0 + self.speed_integral(u0, u) - s;
            let step = err / self.param_speed(u);
            u -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        u.clamp(u0, u1)
    }

    fn interior_point(&self, u: f64) -> RefPoint {
        let (x, y) = self.derivs(u);
        let speed_sq = x[1] * x[1] + y[1] * y[1];
        let speed = speed_sq.sqrt();
        let cross = x[1] * y[2] - y[1] * x[2];
        let cross_d = x[1] * y[3] - y[1] * x[3];
        let denom = speed_sq * speed;
        let denom_d = 3.0 * speed * (x[1] * x[2] + y[1] * y[2]);
        let curvature = cross / denom;
        let curvature_du = (cross_d * denom - cross * denom_d) / (denom * denom);
        RefPoint {
            x: x[0],
            y: y[0],
            heading: y[1].atan2(x[1]),
            curvature,
            curvature_rate: curvature_du / speed,
        }
    }

    /// Reference point at arc length `s`; linear continuation outside `[0, L]`.
    pub fn point(&self, s: f64) -> RefPoint {
        let (anchor, overshoot) = if s < 0.0 {
            (0.0, s)
        } else if s > self.length {
            (self.length, s - self.length)
        } else {
            return self.interior_point(self.param_at(s));
        };
        let u = self.param_at(anchor);
        let mut p = self.interior_point(u);
        p.x += overshoot * p.heading.cos();
        p.y += overshoot * p.heading.sin();
        p.curvature = 0.0;
        p.curvature_rate = 0.0;
        p
    }

    pub fn to_cartesian(&self, s: f64, d: f64) -> (f64, f64) {
        let r = self.point(s);
        (r.x - d * r.heading.sin(), r.y + d * r.heading.cos())
    }

    /// Projects a Cartesian point to `(s, d)`, `d` positive to the left.
    pub fn project(&self, x: f64, y: f64) -> (f64, f64) {
        let mut s = self.nearest_table_s(x, y);
        for _ in 0..50 {
            let r = self.point(s);
            let (sin_h, cos_h) = r.heading.sin_cos();
            let (dx, dy) = (x - r.x, y - r.y);
            let along = dx * cos_h + dy * sin_h;
            let d = -dx * sin_h + dy * cos_h;
            let slope = 1.0 - r.curvature * d;
            let step = if slope > 0.1 { along / slope } else { along };
            s += step;
            if step.abs() < 1e-12 {
                break;
            }
        }
        let r = self.point(s);
        let d = -(x - r.x) * r.heading.sin() + (y - r.y) * r.heading.cos();
        (s, d)
    }

    fn nearest_table_s(&self, x: f64, y: f64) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (&(_, s), &(px, py)) in self.table.iter().zip(&self.table_xy) {
            let dist = (px - x).powi(2) + (py - y).powi(2);
            if dist < best.0 {
                best = (dist, s);
            }
        }
        // Points ahead of or behind the line project onto the linear extensions.
        let end = self.point(self.length);
        let ahead = (x - end.x) * end.heading.cos() + (y - end.y) * end.heading.sin();
        if best.1 >= self.length && ahead > 0.0 {
            return self.length + ahead;
        }
        let start = self.point(0.0);
        let behind = (x - start.x) * start.heading.cos() + (y - start.y) * start.heading.sin();
        if best.1 <= 0.0 && behind < 0.0 {
            return behind;
        }
        best.1
    }

    /// Converts a road-coordinate state to Cartesian pose and kinematics.
    pub fn frenet_to_cartesian(&self, f: &FrenetState) -> CartesianState {
        let r = self.point(f.s);
        let k = r.curvature;
        let (x, y) = (r.x - f.d * r.heading.sin(), r.y + f.d * r.heading.cos());
        let scale = 1.0 - k * f.d;
        // Velocity and acceleration in the (tangent, normal) basis of the reference.
        let vt = f.s_d * scale;
        let vn = f.d_d;
        let vt_dot = f.s_dd * scale - f.s_d * (r.curvature_rate * f.s_d * f.d + k * f.d_d);
        let at = vt_dot - vn * k * f.s_d;
        let an = f.d_dd + vt * k * f.s_d;
        let v = vt.hypot(vn);
        let rel = if v > 1e-9 { vn.atan2(vt) } else { 0.0 };
        let (sin_r, cos_r) = rel.sin_cos();
        CartesianState {
            x,
            y,
            heading: wrap_angle(r.heading + rel),
            v,
            a: at * cos_r + an * sin_r,
            lat_acc: -at * sin_r + an * cos_r,
        }
    }

    /// Inverse of [`frenet_to_cartesian`](Self::frenet_to_cartesian) for a
    /// pose with tangential acceleration `a` and zero normal acceleration.
    pub fn cartesian_to_frenet(&self, x: f64, y: f64, heading: f64, v: f64, a: f64) -> FrenetState {
        let (s, d) = self.project(x, y);
        let r = self.point(s);
        let k = r.curvature;
        let rel = wrap_angle(heading - r.heading);
        let (sin_r, cos_r) = rel.sin_cos();
        let scale = 1.0 - k * d;
        let vt = v * cos_r;
        let vn = v * sin_r;
        let s_d = vt / scale;
        let d_d = vn;
        let at = a * cos_r;
        let an = a * sin_r;
        let d_dd = an - vt * k * s_d;
        let vt_dot = at + vn * k * s_d;
        let s_dd = (vt_dot + s_d * (r.curvature_rate * s_d * d + k * d_d)) / scale;
        FrenetState {
            s,
            s_d,
            s_dd,
            d,
            d_d,
            d_dd,
        }
    }
}

/// Builds the road frame for a reference polyline.
pub fn build_frame(reference_line: &[Point2]) -> Result<FrenetFrame> {
    FrenetFrame::new(reference_line)
}
