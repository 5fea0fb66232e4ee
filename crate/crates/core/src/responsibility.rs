//! Reachable sets of road users and their responsibility shares.
//!
//! Reachable sets are boxes in road coordinates (arc-length interval times
//! lateral interval) over-approximating the occupancy of a road user at each
//! step, once under physical bounds only and once additionally under traffic
//! rules (speed limit, lateral road or sidewalk bounds).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::{Corridor, FrenetFrame, TrajectorySample};
use crate::geometry::wrap_angle;
use crate::prediction::PredictedTrajectory;
use crate::risk::{aligned_half_extents, Footprint, ImpactArea, RiskLedger};
use crate::scenario::{AgentState, RoadUser, Scenario, UserClass};

/// Physical motion bounds of one road-user class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionBounds {
    pub a_min: f64,
    pub a_max: f64,
    /// Physical top speed (m/s).
    pub v_max: f64,
    /// Largest lateral speed relative to the direction of travel (m/s).
    pub lateral_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassBounds {
    pub car: MotionBounds,
    pub truck: MotionBounds,
    pub cyclist: MotionBounds,
    /// Pedestrians move in any direction up to `v_max`.
    pub pedestrian: MotionBounds,
}

impl Default for ClassBounds {
    fn default() -> Self {
        Self {
            car: MotionBounds {
                a_min: -9.0,
                a_max: 4.0,
                v_max: 60.0,
                lateral_rate: 3.0,
            },
            truck: MotionBounds {
                a_min: -7.0,
                a_max: 2.0,
                v_max: 35.0,
                lateral_rate: 2.0,
            },
            cyclist: MotionBounds {
                a_min: -4.0,
                a_max: 2.0,
                v_max: 12.0,
                lateral_rate: 1.5,
            },
            pedestrian: MotionBounds {
                a_min: -3.0,
                a_max: 3.0,
                v_max: 2.0,
                lateral_rate: 2.0,
            },
        }
    }
}

impl ClassBounds {
    pub fn get(&self, class: UserClass) -> &MotionBounds {
        match class {
            UserClass::Car => &self.car,
            UserClass::Truck => &self.truck,
            UserClass::Cyclist => &self.cyclist,
            UserClass::Pedestrian => &self.pedestrian,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResponsibilityParams {
    pub enabled: bool,
    /// Share for a collision reachable only by breaking a rule.
    pub r_rule: f64,
    /// Saturation value of the mass-based share of motorized users.
    pub r_char_max: f64,
    /// Reference mass of the saturation law (kg).
    pub m_ref: f64,
    /// Share of a road user striking the ego from behind.
    pub r_rear: f64,
    /// Upper bound of any total share; must stay below 1.
    pub r_cap: f64,
    /// Width of the sidewalk strip beyond each road edge (m).
    pub sidewalk_width: f64,
    pub bounds: ClassBounds,
}

impl Default for ResponsibilityParams {
    fn default() -> Self {
        Self {
            enabled: true,
            r_rule: 0.5,
            r_char_max: 0.2,
            m_ref: 1500.0,
            r_rear: 0.5,
            r_cap: 0.9,
            sidewalk_width: 3.0,
            bounds: ClassBounds::default(),
        }
    }
}

impl ResponsibilityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_cap >= 0.0 && self.r_cap < 1.0) {
            return Err(Error::config("responsibility.r_cap", "must lie in [0, 1)"));
        }
        for (name, v) in [
            ("r_rule", self.r_rule),
            ("r_char_max", self.r_char_max),
            ("r_rear", self.r_rear),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(
                    format!("responsibility.{name}"),
                    "must lie in [0, 1]",
                ));
            }
        }
        if !(self.m_ref > 0.0) {
            return Err(Error::config("responsibility.m_ref", "must be > 0"));
        }
        if !(self.sidewalk_width >= 0.0) {
            return Err(Error::config(
                "responsibility.sidewalk_width",
                "must be >= 0",
            ));
        }
        for class in [
            UserClass::Car,
            UserClass::Truck,
            UserClass::Cyclist,
            UserClass::Pedestrian,
        ] {
            let b = self.bounds.get(class);
            if !(b.a_min <= 0.0 && b.a_max >= 0.0 && b.v_max > 0.0 && b.lateral_rate >= 0.0) {
                return Err(Error::config(
                    format!("responsibility.bounds.{}", class.as_str()),
                    "need a_min <= 0 <= a_max, v_max > 0, lateral_rate >= 0",
                ));
            }
        }
        Ok(())
    }
}

/// Closed interval; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        other.is_empty() || (other.lo >= self.lo && other.hi <= self.hi)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// Occupancy box in road coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadBox {
    pub s: Interval,
    pub d: Interval,
}

impl RoadBox {
    pub fn is_empty(&self) -> bool {
        self.s.is_empty() || self.d.is_empty()
    }

    pub fn contains(&self, s: f64, d: f64) -> bool {
        !self.is_empty() && self.s.contains(s) && self.d.contains(d)
    }

    pub fn contains_box(&self, other: &RoadBox) -> bool {
        other.is_empty()
            || (self.s.contains_interval(&other.s) && self.d.contains_interval(&other.d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReachStep {
    pub t: f64,
    pub legal: RoadBox,
    pub physical: RoadBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachableSet {
    pub user_id: String,
    /// Step `k` covers lookahead `k dt`, `k = 0..=N`.
    pub steps: Vec<ReachStep>,
}

/// Distance covered in `tau` seconds starting at speed `v` under constant
/// acceleration `a`, with the speed saturating at `cap` (or at zero when
/// braking).
fn travel(v: f64, a: f64, cap: f64, tau: f64) -> f64 {
    if a > 0.0 && v < cap {
        let t_sat = (cap - v) / a;
        if t_sat >= tau {
            v * tau + 0.5 * a * tau * tau
        } else {
            v * t_sat + 0.5 * a * t_sat * t_sat + cap * (tau - t_sat)
        }
    } else if a < 0.0 && v > 0.0 {
        let t_stop = v / -a;
        if t_stop >= tau {
            v * tau + 0.5 * a * tau * tau
        } else {
            0.5 * v * t_stop
        }
    } else {
        v.min(cap.max(v)) * tau
    }
}

struct Kinematics {
    s: f64,
    d: f64,
    /// Heading relative to the reference line at `s`.
    rel_heading: f64,
    v: f64,
}

fn road_box_from_corners(frame: &FrenetFrame, corners: &[(f64, f64)], pad: (f64, f64)) -> RoadBox {
    let mut s = Interval::new(f64::INFINITY, f64::NEG_INFINITY);
    let mut d = s;
    for &(x, y) in corners {
        let (cs, cd) = frame.project(x, y);
        s = s.hull(&Interval::new(cs, cs));
        d = d.hull(&Interval::new(cd, cd));
    }
    RoadBox {
        s: Interval::new(s.lo - pad.0, s.hi + pad.0),
        d: Interval::new(d.lo - pad.1, d.hi + pad.1),
    }
}

/// Legal lateral occupancy bounds for a class on this road.
fn legal_lateral(class: UserClass, d: f64, corridor: &Corridor, sidewalk: f64) -> Interval {
    match class {
        UserClass::Pedestrian => {
            if d <= 0.5 * (corridor.d_min + corridor.d_max) {
                Interval::new(corridor.d_min - sidewalk, corridor.d_min)
            } else {
                Interval::new(corridor.d_max, corridor.d_max + sidewalk)
            }
        }
        _ => Interval::new(corridor.d_min, corridor.d_max),
    }
}

/// Reachable set of a road user from its state `state` over `steps` steps.
#[allow(clippy::too_many_arguments)]
pub fn reachable_set_from_state(
    user: &RoadUser,
    state: AgentState,
    scenario: &Scenario,
    frame: &FrenetFrame,
    steps: usize,
    dt: f64,
    params: &ResponsibilityParams,
) -> ReachableSet {
    let bounds = params.bounds.get(user.class);
    let corridor = Corridor::of(scenario);
    let (s0, d0) = frame.project(state.x, state.y);
    let kin = Kinematics {
        s: s0,
        d: d0,
        rel_heading: wrap_angle(state.heading - frame.point(s0).heading),
        v: state.v,
    };
    let fp = Footprint {
        length: user.length(),
        width: user.width(),
    };
    let pad = aligned_half_extents(fp, kin.rel_heading);
    let initial = RoadBox {
        s: Interval::new(kin.s - pad.0, kin.s + pad.0),
        d: Interval::new(kin.d - pad.1, kin.d + pad.1),
    };
    let lateral_bounds =
        legal_lateral(user.class, kin.d, &corridor, params.sidewalk_width).hull(&initial.d);
    let legal_cap = bounds.v_max.min(scenario.speed_limit);
    let legal_start = kin.v.min(legal_cap);

    let (sin_h, cos_h) = state.heading.sin_cos();
    let mut out = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let tau = k as f64 * dt;
        if k == 0 {
            out.push(ReachStep {
                t: 0.0,
                legal: initial,
                physical: initial,
            });
            continue;
        }
        let (physical, legal_center) = if user.class == UserClass::Pedestrian {
            let r = bounds.v_max * tau;
            let b = RoadBox {
                s: Interval::new(kin.s - r - pad.0, kin.s + r + pad.0),
                d: Interval::new(kin.d - r - pad.1, kin.d + r + pad.1),
            };
            (b, b)
        } else {
            let near = travel(kin.v, bounds.a_min, bounds.v_max, tau);
            let far = travel(kin.v, bounds.a_max, bounds.v_max.max(kin.v), tau);
            let far_legal = travel(legal_start, bounds.a_max, legal_cap, tau).clamp(near, far);
            let side = bounds.lateral_rate * tau;
            let region = |lo: f64, hi: f64| {
                let corners =
                    [(lo, -side), (lo, side), (hi, -side), (hi, side)].map(|(along, across)| {
                        (
                            state.x + along * cos_h - across * sin_h,
                            state.y + along * sin_h + across * cos_h,
                        )
                    });
                road_box_from_corners(frame, &corners, pad)
            };
            (region(near, far), region(near, far_legal))
        };
        let legal = RoadBox {
            s: legal_center.s.intersect(&physical.s),
            d: legal_center
                .d
                .intersect(&physical.d)
                .intersect(&lateral_bounds),
        };
        out.push(ReachStep {
            t: tau,
            legal,
            physical,
        });
    }
    ReachableSet {
        user_id: user.id.clone(),
        steps: out,
    }
}

/// Reachable set of `user` from its replayed state at `t0`.
pub fn reachable_set(
    user: &RoadUser,
    t0: f64,
    scenario: &Scenario,
    frame: &FrenetFrame,
    params: &ResponsibilityParams,
) -> ReachableSet {
    reachable_set_from_state(
        user,
        user.state_at(t0),
        scenario,
        frame,
        scenario.horizon_steps(),
        scenario.dt,
        params,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleAssessment {
    pub r_rule: f64,
    /// The collision point cannot be reached at all.
    pub impossible: bool,
}

/// Share from traffic-rule adherence for a collision at `(s, d)` at step `k`.
pub fn rule_violation_responsibility(
    s: f64,
    d: f64,
    step: usize,
    set: &ReachableSet,
    params: &ResponsibilityParams,
) -> RuleAssessment {
    let Some(reach) = set.steps.get(step).or(set.steps.last()) else {
        return RuleAssessment {
            r_rule: 0.0,
            impossible: false,
        };
    };
    if reach.legal.contains(s, d) {
        RuleAssessment {
            r_rule: 0.0,
            impossible: false,
        }
    } else if reach.physical.contains(s, d) {
        RuleAssessment {
            r_rule: params.r_rule,
            impossible: false,
        }
    } else {
        RuleAssessment {
            r_rule: 0.0,
            impossible: true,
        }
    }
}

/// Mass-based share of motorized road users; zero for vulnerable users.
pub fn characteristic_responsibility(
    protected: bool,
    mass: f64,
    params: &ResponsibilityParams,
) -> f64 {
    if !protected {
        return 0.0;
    }
    params.r_char_max * mass / (mass + params.m_ref)
}

/// Share from the space of actions: a road user hitting the ego from behind
/// in the same lane is responsible for that collision.
pub fn action_space_responsibility(
    ego_area: ImpactArea,
    other_area: ImpactArea,
    same_lane: bool,
    params: &ResponsibilityParams,
) -> f64 {
    if same_lane && other_area == ImpactArea::Front && ego_area == ImpactArea::Rear {
        params.r_rear
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponsibilityShare {
    pub user_id: String,
    pub r_rule: f64,
    pub r_char: f64,
    pub r_action: f64,
    pub r_total: f64,
    pub impossible: bool,
}

impl ResponsibilityShare {
    pub fn combine(
        user_id: impl Into<String>,
        r_rule: f64,
        r_char: f64,
        r_action: f64,
        impossible: bool,
        r_cap: f64,
    ) -> Self {
        Self {
            user_id: user_id.into(),
            r_rule,
            r_char,
            r_action,
            r_total: r_cap.min(r_rule + r_char + r_action),
            impossible,
        }
    }

    pub fn none(user_id: impl Into<String>) -> Self {
        Self::combine(user_id, 0.0, 0.0, 0.0, false, 0.0)
    }
}

/// Shares of every road user in `ledger` for candidate `sample`.
///
/// The potential collision considered for each user is the step of its
/// largest risk; the collision point is the ego position at that step.
pub fn assign_shares(
    sample: &TrajectorySample,
    ledger: &RiskLedger,
    predictions: &[PredictedTrajectory],
    reach: &[ReachableSet],
    scenario: &Scenario,
    frame: &FrenetFrame,
    params: &ResponsibilityParams,
) -> Vec<ResponsibilityShare> {
    let corridor = Corridor::of(scenario);
    ledger
        .users
        .iter()
        .map(|ur| {
            if !params.enabled {
                return ResponsibilityShare::none(&ur.user_id);
            }
            let Some(user) = scenario.agent(&ur.user_id) else {
                return ResponsibilityShare::none(&ur.user_id);
            };
            let k = ur.peak_step + 1;
            let ego = &sample.states[k.min(sample.states.len() - 1)];
            let rule = reach
                .iter()
                .find(|r| r.user_id == ur.user_id)
                .map(|set| rule_violation_responsibility(ego.s, ego.d, k, set, params))
                .unwrap_or(RuleAssessment {
                    r_rule: 0.0,
                    impossible: false,
                });
            let r_char = characteristic_responsibility(user.protected(), user.mass(), params);
            let same_lane = predictions
                .iter()
                .find(|p| p.user_id == ur.user_id)
                .and_then(|p| p.steps.get(ur.peak_step))
                .map(|step| {
                    let (_, d) = frame.project(step.mean_x, step.mean_y);
                    corridor.lane_index(d, scenario.lane_width)
                        == corridor.lane_index(ego.d, scenario.lane_width)
                })
                .unwrap_or(false);
            let (ego_area, user_area) = ur
                .areas
                .get(ur.peak_step)
                .copied()
                .unwrap_or((ImpactArea::Side, ImpactArea::Side));
            let r_action = action_space_responsibility(ego_area, user_area, same_lane, params);
            ResponsibilityShare::combine(
                &ur.user_id,
                rule.r_rule,
                r_char,
                r_action,
                rule.impossible,
                params.r_cap,
            )
        })
        .collect()
}
