//! Boundary-value polynomials for lateral and longitudinal motion.

/// Position and its first three time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
    pub jerk: f64,
}

/// Polynomial in time valid on `[0, duration]`, continued at constant
/// velocity afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePolynomial {
    coeffs: [f64; 6],
    duration: f64,
}

impl TimePolynomial {
    /// Quintic from `(x0, v0, a0)` to `(x1, v1, a1)` over `duration`.
    pub fn quintic(start: (f64, f64, f64), end: (f64, f64, f64), duration: f64) -> Self {
        let (x0, v0, a0) = start;
        let (x1, v1, a1) = end;
        let t = duration;
        let (t2, t3) = (t * t, t * t * t);
        let dx = x1 - x0;
        let c3 = (20.0 * dx - (8.0 * v1 + 12.0 * v0) * t - (3.0 * a0 - a1) * t2) / (2.0 * t3);
        let c4 = (-30.0 * dx + (14.0 * v1 + 16.0 * v0) * t + (3.0 * a0 - 2.0 * a1) * t2)
            / (2.0 * t3 * t);
        let c5 = (12.0 * dx - 6.0 * (v1 + v0) * t + (a1 - a0) * t2) / (2.0 * t3 * t2);
        Self {
            coeffs: [x0, v0, 0.5 * a0, c3, c4, c5],
            duration,
        }
    }

    /// Quartic from `(x0, v0, a0)` to velocity `v1` and acceleration `a1`.
    pub fn quartic(start: (f64, f64, f64), end_velocity: f64, end_acc: f64, duration: f64) -> Self {
        let (x0, v0, a0) = start;
        let t = duration;
        let b1 = end_velocity - v0 - a0 * t;
        let b2 = end_acc - a0;
        let c3 = (3.0 * b1 - t * b2) / (3.0 * t * t);
        let c4 = (t * b2 - 2.0 * b1) / (4.0 * t * t * t);
        Self {
            coeffs: [x0, v0, 0.5 * a0, c3, c4, 0.0],
            duration,
        }
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    fn eval_inside(&self, t: f64) -> Motion {
        let c = &self.coeffs;
        Motion {
            pos: c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5])))),
            vel: c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5]))),
            acc: 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5])),
            jerk: 6.0 * c[3] + t * (24.0 * c[4] + t * 60.0 * c[5]),
        }
    }

    pub fn eval(&self, t: f64) -> Motion {
        if t <= self.duration {
            return self.eval_inside(t);
        }
        let end = self.eval_inside(self.duration);
        Motion {
            pos: end.pos + end.vel * (t - self.duration),
            vel: end.vel,
            acc: 0.0,
            jerk: 0.0,
        }
    }
}
