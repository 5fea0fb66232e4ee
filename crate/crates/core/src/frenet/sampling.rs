use std::fmt;

use serde::{Deserialize, Serialize};

use super::frame::{FrenetFrame, FrenetState};
use super::polynomial::{Motion, TimePolynomial};
use crate::error::{Error, Result};
use crate::scenario::{EgoLimits, Scenario};

/// Numerical slack on kinematic limit checks.
const LIMIT_TOL: f64 = 1e-9;

/// End-state discretization, expressed relative to the road and ego target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingConfig {
    /// Lateral end offsets around every lane centre, as fractions of lane width.
    pub lateral_offsets: Vec<f64>,
    /// End velocities as fractions of the ego target velocity.
    pub velocity_fractions: Vec<f64>,
    /// Manoeuvre durations (s).
    pub durations: Vec<f64>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            lateral_offsets: vec![-0.5, 0.0, 0.5],
            velocity_fractions: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.1],
            durations: vec![1.0, 2.0, 3.0, 4.0],
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lateral_offsets.is_empty()
            || self.velocity_fractions.is_empty()
            || self.durations.is_empty()
        {
            return Err(Error::config("sampling", "empty end-state grid"));
        }
        if self
            .lateral_offsets
            .iter()
            .chain(&self.velocity_fractions)
            .any(|v| !v.is_finite())
        {
            return Err(Error::config("sampling", "non-finite grid value"));
        }
        if self.velocity_fractions.iter().any(|&v| v < 0.0) {
            return Err(Error::config(
                "sampling.velocity_fractions",
                "fractions must be >= 0",
            ));
        }
        if self.durations.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
            return Err(Error::config("sampling.durations", "durations must be > 0"));
        }
        Ok(())
    }

    /// Resolves the grid against a scenario's lanes and ego target speed.
    pub fn grid(&self, scenario: &Scenario) -> EndStateGrid {
        let w = scenario.lane_width;
        let mut lateral: Vec<f64> = (0..scenario.lane_count)
            .flat_map(|lane| {
                let centre = lane as f64 * w;
                self.lateral_offsets.iter().map(move |f| centre + f * w)
            })
            .collect();
        lateral.sort_by(f64::total_cmp);
        lateral.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let target = scenario.ego.target_velocity;
        EndStateGrid {
            lateral,
            velocities: self.velocity_fractions.iter().map(|f| f * target).collect(),
            durations: self.durations.clone(),
        }
    }
}

/// Concrete end-state values enumerated as a full cross product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndStateGrid {
    pub lateral: Vec<f64>,
    pub velocities: Vec<f64>,
    pub durations: Vec<f64>,
}

impl EndStateGrid {
    pub fn len(&self) -> usize {
        self.lateral.len() * self.velocities.len() * self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Lateral extent of the drivable road for the ego reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corridor {
    pub d_min: f64,
    pub d_max: f64,
}

impl Corridor {
    /// Lanes are stacked to the left of the reference line, which runs along
    /// the centre of the first lane.
    pub fn of(scenario: &Scenario) -> Self {
        let w = scenario.lane_width;
        Self {
            d_min: -0.5 * w,
            d_max: (scenario.lane_count as f64 - 0.5) * w,
        }
    }

    pub fn contains(&self, d: f64) -> bool {
        d >= self.d_min - LIMIT_TOL && d <= self.d_max + LIMIT_TOL
    }

    /// Index of the lane containing lateral offset `d`, clamped to the road.
    pub fn lane_index(&self, d: f64, lane_width: f64) -> i64 {
        let lanes = ((self.d_max - self.d_min) / lane_width).round() as i64;
        ((d - self.d_min) / lane_width)
            .floor()
            .clamp(0.0, (lanes - 1) as f64) as i64
    }
}

/// Fixed inputs shared by every candidate of one planning cycle.
#[derive(Debug, Clone, Copy)]
pub struct SamplingSetup {
    pub dt: f64,
    /// Number of steps after the initial state.
    pub steps: usize,
    pub limits: EgoLimits,
    pub corridor: Corridor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub s: f64,
    pub s_d: f64,
    pub s_dd: f64,
    pub s_ddd: f64,
    pub d: f64,
    pub d_d: f64,
    pub d_dd: f64,
    pub d_ddd: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    pub a: f64,
    pub lat_acc: f64,
}

impl TrajectoryState {
    pub fn frenet(&self) -> FrenetState {
        FrenetState {
            s: self.s,
            s_d: self.s_d,
            s_dd: self.s_dd,
            d: self.d,
            d_d: self.d_d,
            d_dd: self.d_dd,
        }
    }

    /// Magnitude of the road-frame jerk vector.
    pub fn jerk(&self) -> f64 {
        self.s_ddd.hypot(self.d_ddd)
    }

    /// Limit violations of this single state.
    pub fn violations(&self, limits: &EgoLimits, corridor: &Corridor) -> Vec<Infeasibility> {
        let mut out = Vec::new();
        if self.v > limits.v_max + LIMIT_TOL {
            out.push(Infeasibility::VelocityLimit);
        }
        if self.s_d < -LIMIT_TOL {
            out.push(Infeasibility::Reversing);
        }
        if self.a > limits.a_max + LIMIT_TOL || self.a < limits.a_min - LIMIT_TOL {
            out.push(Infeasibility::Acceleration);
        }
        if self.lat_acc.abs() > limits.lat_acc_max + LIMIT_TOL {
            out.push(Infeasibility::LateralAcceleration);
        }
        if self.jerk() > limits.jerk_max + LIMIT_TOL {
            out.push(Infeasibility::Jerk);
        }
        if !corridor.contains(self.d) {
            out.push(Infeasibility::Corridor);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    VelocityLimit,
    Reversing,
    Acceleration,
    LateralAcceleration,
    Jerk,
    Corridor,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Infeasibility::VelocityLimit => "velocity limit",
            Infeasibility::Reversing => "reversing",
            Infeasibility::Acceleration => "acceleration limit",
            Infeasibility::LateralAcceleration => "lateral acceleration limit",
            Infeasibility::Jerk => "jerk limit",
            Infeasibility::Corridor => "road corridor",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndConditions {
    pub d_end: f64,
    pub v_end: f64,
    pub duration: f64,
}

/// One candidate ego trajectory over the planning horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub id: usize,
    pub states: Vec<TrajectoryState>,
    pub end: EndConditions,
    /// Sorted, deduplicated limit violations; empty when feasible.
    pub infeasibility: Vec<Infeasibility>,
}

impl TrajectorySample {
    pub fn feasible(&self) -> bool {
        self.infeasibility.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.t)
    }

    /// Arc length travelled over the horizon.
    pub fn progress(&self) -> f64 {
        match (self.states.first(), self.states.last()) {
            (Some(a), Some(b)) => b.s - a.s,
            _ => 0.0,
        }
    }
}

fn build_sample(
    id: usize,
    start: &FrenetState,
    end: EndConditions,
    frame: &FrenetFrame,
    setup: &SamplingSetup,
) -> TrajectorySample {
    let lateral = TimePolynomial::quintic(
        (start.d, start.d_d, start.d_dd),
        (end.d_end, 0.0, 0.0),
        end.duration,
    );
    let longitudinal = TimePolynomial::quartic(
        (start.s, start.s_d, start.s_dd),
        end.v_end,
        0.0,
        end.duration,
    );

    let states: Vec<TrajectoryState> = (0..=setup.steps)
        .map(|k| {
            let t = k as f64 * setup.dt;
            let (lon, lat) = if k == 0 {
                // The first state is the current state, bit for bit.
                let l = longitudinal.eval(0.0);
                let d = lateral.eval(0.0);
                (
                    Motion {
                        pos: start.s,
                        vel: start.s_d,
                        acc: start.s_dd,
                        jerk: l.jerk,
                    },
                    Motion {
                        pos: start.d,
                        vel: start.d_d,
                        acc: start.d_dd,
                        jerk: d.jerk,
                    },
                )
            } else {
                (longitudinal.eval(t), lateral.eval(t))
            };
            let f = FrenetState {
                s: lon.pos,
                s_d: lon.vel,
                s_dd: lon.acc,
                d: lat.pos,
                d_d: lat.vel,
                d_dd: lat.acc,
            };
            let c = frame.frenet_to_cartesian(&f);
            TrajectoryState {
                t,
                s: f.s,
                s_d: f.s_d,
                s_dd: f.s_dd,
                s_ddd: lon.jerk,
                d: f.d,
                d_d: f.d_d,
                d_dd: f.d_dd,
                d_ddd: lat.jerk,
                x: c.x,
                y: c.y,
                heading: c.heading,
                v: c.v,
                a: c.a,
                lat_acc: c.lat_acc,
            }
        })
        .collect();

    let mut infeasibility = Vec::new();
    for (k, st) in states.iter().enumerate() {
        let mut v = st.violations(&setup.limits, &setup.corridor);
        if k == 0 {
            // Only the sample's own initial jerk is its responsibility at t = 0.
            v.retain(|r| *r == Infeasibility::Jerk);
        }
        infeasibility.extend(v);
    }
    infeasibility.sort();
    infeasibility.dedup();

    TrajectorySample {
        id,
        states,
        end,
        infeasibility,
    }
}

/// Enumerates the full end-state grid from the current ego state.
///
/// Sample ids follow the enumeration order lateral, velocity, duration.
pub fn sample_trajectories(
    start: &FrenetState,
    frame: &FrenetFrame,
    grid: &EndStateGrid,
    setup: &SamplingSetup,
) -> Result<Vec<TrajectorySample>> {
    if grid.is_empty() {
        return Err(Error::config("sampling", "empty end-state grid"));
    }
    let mut out = Vec::with_capacity(grid.len());
    for &d_end in &grid.lateral {
        for &v_end in &grid.velocities {
            for &duration in &grid.durations {
                let end = EndConditions {
                    d_end,
                    v_end,
                    duration,
                };
                out.push(build_sample(out.len(), start, end, frame, setup));
            }
        }
    }
    Ok(out)
}
