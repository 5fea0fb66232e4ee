//! World description: road geometry, ego configuration and scripted road users.
//!
//! Scenarios are read from JSON. Unknown keys are rejected; optional keys
//! (`duration`, agent `mass`/`length`/`width`, ego `id`/`mass`) fall back to
//! documented defaults and are written back explicitly on serialization.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Point2};

/// Simulated duration when a scenario file omits `duration`.
pub const DEFAULT_DURATION: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserClass {
    Car,
    Truck,
    Cyclist,
    Pedestrian,
}

impl UserClass {
    /// Vehicles shield their occupants; cyclists and pedestrians do not.
    pub fn is_protected(self) -> bool {
        matches!(self, UserClass::Car | UserClass::Truck)
    }

    pub fn is_vulnerable(self) -> bool {
        !self.is_protected()
    }

    pub fn default_mass(self) -> f64 {
        match self {
            UserClass::Car => 1500.0,
            UserClass::Truck => 15000.0,
            UserClass::Cyclist => 90.0,
            UserClass::Pedestrian => 75.0,
        }
    }

    /// Default (length, width) in metres.
    pub fn default_dimensions(self) -> (f64, f64) {
        match self {
            UserClass::Car => (4.5, 1.8),
            UserClass::Truck => (10.0, 2.5),
            UserClass::Cyclist => (1.8, 0.6),
            UserClass::Pedestrian => (0.5, 0.5),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UserClass::Car => "car",
            UserClass::Truck => "truck",
            UserClass::Cyclist => "cyclist",
            UserClass::Pedestrian => "pedestrian",
        }
    }
}

/// One scripted state, serialized as `[t, x, y, heading, v]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 5]", into = "[f64; 5]")]
pub struct ScriptPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
}

impl From<[f64; 5]> for ScriptPoint {
    fn from(a: [f64; 5]) -> Self {
        Self {
            t: a[0],
            x: a[1],
            y: a[2],
            heading: a[3],
            v: a[4],
        }
    }
}

impl From<ScriptPoint> for [f64; 5] {
    fn from(p: ScriptPoint) -> Self {
        [p.t, p.x, p.y, p.heading, p.v]
    }
}

/// Kinematic snapshot of a road user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoadUser {
    pub id: String,
    pub class: UserClass,
    #[serde(default)]
    mass: Option<f64>,
    #[serde(default)]
    length: Option<f64>,
    #[serde(default)]
    width: Option<f64>,
    pub script: Vec<ScriptPoint>,
}

impl RoadUser {
    /// Builds a road user, filling class defaults for absent dimensions.
    pub fn new(
        id: impl Into<String>,
        class: UserClass,
        mass: Option<f64>,
        dimensions: Option<(f64, f64)>,
        script: Vec<ScriptPoint>,
    ) -> Self {
        let (l, w) = dimensions.unwrap_or_else(|| class.default_dimensions());
        Self {
            id: id.into(),
            class,
            mass: Some(mass.unwrap_or_else(|| class.default_mass())),
            length: Some(l),
            width: Some(w),
            script,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass.unwrap_or_else(|| self.class.default_mass())
    }

    pub fn length(&self) -> f64 {
        self.length
            .unwrap_or_else(|| self.class.default_dimensions().0)
    }

    pub fn width(&self) -> f64 {
        self.width
            .unwrap_or_else(|| self.class.default_dimensions().1)
    }

    pub fn protected(&self) -> bool {
        self.class.is_protected()
    }

    fn resolve_defaults(&mut self) {
        self.mass = Some(self.mass());
        self.length = Some(self.length());
        self.width = Some(self.width());
    }

    /// Replayed state at time `t` (seconds, `t >= 0`).
    ///
    /// Position and speed are interpolated linearly between script knots and
    /// heading along the shorter arc. Past the last knot the user continues at
    /// constant velocity along its last heading.
    pub fn state_at(&self, t: f64) -> AgentState {
        let script = &self.script;
        let first = script[0];
        if t <= first.t {
            return AgentState {
                x: first.x,
                y: first.y,
                heading: first.heading,
                v: first.v,
            };
        }
        let last = script[script.len() - 1];
        if t >= last.t {
            let dt = t - last.t;
            return AgentState {
                x: last.x + last.v * last.heading.cos() * dt,
                y: last.y + last.v * last.heading.sin() * dt,
                heading: last.heading,
                v: last.v,
            };
        }
        // First knot strictly after t; exists since t < last.t.
        let hi = script.partition_point(|p| p.t <= t);
        let (a, b) = (script[hi - 1], script[hi]);
        let f = (t - a.t) / (b.t - a.t);
        AgentState {
            x: a.x + f * (b.x - a.x),
            y: a.y + f * (b.y - a.y),
            heading: wrap_angle(a.heading + f * wrap_angle(b.heading - a.heading)),
            v: a.v + f * (b.v - a.v),
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        positive(&format!("{field}.mass"), self.mass())?;
        positive(&format!("{field}.length"), self.length())?;
        positive(&format!("{field}.width"), self.width())?;
        if self.script.is_empty() {
            return Err(Error::validation(
                format!("{field}.script"),
                "script is empty",
            ));
        }
        if self.script[0].t != 0.0 {
            return Err(Error::validation(
                format!("{field}.script"),
                "script must start at t = 0",
            ));
        }
        for (i, p) in self.script.iter().enumerate() {
            let arr: [f64; 5] = (*p).into();
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::validation(
                    format!("{field}.script[{i}]"),
                    "non-finite value",
                ));
            }
            if p.v < 0.0 {
                return Err(Error::validation(
                    format!("{field}.script[{i}]"),
                    "negative speed",
                ));
            }
        }
        for (i, w) in self.script.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(Error::validation(
                    format!("{field}.script[{}]", i + 1),
                    "script times must be strictly increasing",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoState {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    #[serde(default)]
    pub a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoLimits {
    pub v_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    /// Bound on |lateral acceleration| (m/s^2).
    pub lat_acc_max: f64,
    /// Bound on |jerk| (m/s^3).
    pub jerk_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dimensions {
    pub length: f64,
    pub width: f64,
}

fn default_ego_id() -> String {
    "ego".to_string()
}

fn default_ego_mass() -> f64 {
    UserClass::Car.default_mass()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoConfig {
    #[serde(default = "default_ego_id")]
    pub id: String,
    pub state: EgoState,
    pub limits: EgoLimits,
    pub dimensions: Dimensions,
    #[serde(default = "default_ego_mass")]
    pub mass: f64,
    pub target_velocity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub reference_line: Vec<Point2>,
    pub lane_width: f64,
    pub lane_count: u32,
    pub speed_limit: f64,
    pub dt: f64,
    #[serde(rename = "horizon_T")]
    pub horizon: f64,
    #[serde(default)]
    duration: Option<f64>,
    pub ego: EgoConfig,
    pub agents: Vec<RoadUser>,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            field,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, "must be finite"))
    }
}

impl Scenario {
    /// Parses and validates a scenario from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut scenario: Scenario = serde_json::from_str(text).map_err(Error::from_json)?;
        scenario.duration = Some(scenario.duration());
        for agent in &mut scenario.agents {
            agent.resolve_defaults();
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Simulated duration in seconds.
    pub fn duration(&self) -> f64 {
        self.duration.unwrap_or(DEFAULT_DURATION)
    }

    pub fn set_duration(&mut self, duration: f64) {
        self.duration = Some(duration);
    }

    /// Number of planning steps in one horizon.
    pub fn horizon_steps(&self) -> usize {
        (self.horizon / self.dt + 1e-9).floor() as usize
    }

    pub fn agent(&self, id: &str) -> Option<&RoadUser> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::validation("id", "empty scenario id"));
        }
        if self.reference_line.len() < 2 {
            return Err(Error::validation(
                "reference_line",
                "needs at least two points",
            ));
        }
        for (i, p) in self.reference_line.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::validation(
                    format!("reference_line[{i}]"),
                    "non-finite coordinate",
                ));
            }
        }
        for (i, w) in self.reference_line.windows(2).enumerate() {
            if w[0].distance(&w[1]) <= 1e-9 {
                return Err(Error::validation(
                    format!("reference_line[{}]", i + 1),
                    "repeated point; arc length must strictly increase",
                ));
            }
        }
        positive("lane_width", self.lane_width)?;
        if self.lane_count == 0 {
            return Err(Error::validation("lane_count", "must be at least 1"));
        }
        positive("speed_limit", self.speed_limit)?;
        positive("dt", self.dt)?;
        positive("horizon_T", self.horizon)?;
        if self.horizon < self.dt {
            return Err(Error::validation("horizon_T", "must be >= dt"));
        }
        positive("duration", self.duration())?;

        let ego = &self.ego;
        if ego.id.trim().is_empty() {
            return Err(Error::validation("ego.id", "empty id"));
        }
        for (name, v) in [
            ("ego.state.x", ego.state.x),
            ("ego.state.y", ego.state.y),
            ("ego.state.heading", ego.state.heading),
            ("ego.state.v", ego.state.v),
            ("ego.state.a", ego.state.a),
        ] {
            finite(name, v)?;
        }
        if ego.state.v < 0.0 {
            return Err(Error::validation("ego.state.v", "negative speed"));
        }
        positive("ego.limits.v_max", ego.limits.v_max)?;
        if !(ego.limits.a_min < 0.0) {
            return Err(Error::validation("ego.limits.a_min", "must be < 0"));
        }
        if !(ego.limits.a_max > 0.0) {
            return Err(Error::validation("ego.limits.a_max", "must be > 0"));
        }
        positive("ego.limits.lat_acc_max", ego.limits.lat_acc_max)?;
        positive("ego.limits.jerk_max", ego.limits.jerk_max)?;
        positive("ego.dimensions.length", ego.dimensions.length)?;
        positive("ego.dimensions.width", ego.dimensions.width)?;
        positive("ego.mass", ego.mass)?;
        positive("ego.target_velocity", ego.target_velocity)?;
        if ego.target_velocity > self.speed_limit {
            return Err(Error::validation(
                "ego.target_velocity",
                "exceeds the scenario speed limit",
            ));
        }

        let mut seen = HashSet::new();
        for agent in &self.agents {
            if agent.id == ego.id {
                return Err(Error::validation(
                    format!("agents.{}", agent.id),
                    "agent id collides with ego id",
                ));
            }
            if !seen.insert(agent.id.as_str()) {
                return Err(Error::validation(
                    format!("agents.{}", agent.id),
                    format!("duplicate agent id \"{}\"", agent.id),
                ));
            }
            agent.validate(&format!("agents.{}", agent.id))?;
        }
        Ok(())
    }
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Scenario::from_json(&text)
}

/// Replayed state of `user` at time `t`.
pub fn agent_state_at(user: &RoadUser, t: f64) -> AgentState {
    user.state_at(t)
}
