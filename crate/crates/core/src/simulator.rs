//! Closed-loop simulation: replan every step, execute one step of the
//! chosen candidate, replay the scripted road users and detect collisions.
//!
//! A log is written as JSON lines: one `header` record, one `step` record per
//! planning cycle and a final `summary` record.

use serde::{Deserialize, Serialize};

use crate::config::PlannerConfig;
use crate::error::{Error, Result};
use crate::ethics::{Profile, ValidityLevel};
use crate::geometry::{wrap_angle, OrientedRect, Pose};
use crate::planner::Planner;
use crate::risk::{delta_v, impact_areas, HarmModel, ImpactArea};
use crate::scenario::{AgentState, RoadUser, Scenario, UserClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Finished,
    Collided,
    Timeout,
    Fault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserInfo {
    pub id: String,
    pub class: UserClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub scenario: String,
    pub profile: Profile,
    pub seed: u64,
    pub dt: f64,
    pub duration: f64,
    pub ego_id: String,
    pub users: Vec<UserInfo>,
}

/// Executed ego state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoRecord {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub v: f64,
    pub a: f64,
    pub lat_acc: f64,
    pub jerk: f64,
    pub s: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRiskRecord {
    pub user_id: String,
    /// Risk borne by the road user.
    pub risk: f64,
    /// Risk borne by the ego in a collision with this user.
    pub risk_ego: f64,
    pub max_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub ego: EgoRecord,
    pub sample_id: usize,
    pub level: ValidityLevel,
    pub cost: f64,
    pub risks: Vec<UserRiskRecord>,
    pub ego_risk: f64,
    pub ego_combined: f64,
    /// State the chosen candidate reaches one step later.
    pub next: EgoRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub t: f64,
    pub user_id: String,
    pub user_class: UserClass,
    pub delta_v_ego: f64,
    pub delta_v_user: f64,
    pub harm_ego: f64,
    pub harm_user: f64,
    pub area_ego: ImpactArea,
    pub area_user: ImpactArea,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub status: RunStatus,
    pub steps: usize,
    pub collisions: Vec<CollisionEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Record {
    Header(LogHeader),
    Step(StepRecord),
    Summary(LogSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationLog {
    pub header: LogHeader,
    pub steps: Vec<StepRecord>,
    pub summary: LogSummary,
}

impl SimulationLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |r: &Record| {
            out.push_str(&serde_json::to_string(r).expect("log record serializes"));
            out.push('\n');
        };
        push(&Record::Header(self.header.clone()));
        for s in &self.steps {
            push(&Record::Step(s.clone()));
        }
        push(&Record::Summary(self.summary.clone()));
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut summary = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            match serde_json::from_str::<Record>(line).map_err(Error::from_json)? {
                Record::Header(h) if header.is_none() => header = Some(h),
                Record::Step(s) if header.is_some() && summary.is_none() => steps.push(s),
                Record::Summary(s) if header.is_some() && summary.is_none() => summary = Some(s),
                _ => return Err(Error::Schema("log records out of order".into())),
            }
        }
        match (header, summary) {
            (Some(header), Some(summary)) => Ok(Self {
                header,
                steps,
                summary,
            }),
            _ => Err(Error::Schema("log lacks a header or summary record".into())),
        }
    }

    pub fn collided(&self) -> bool {
        self.summary.status == RunStatus::Collided
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Abort with status `timeout` after this many planning cycles.
    pub max_steps: Option<usize>,
}

fn rect_of(user: &RoadUser, s: &AgentState) -> OrientedRect {
    OrientedRect::new(s.x, s.y, s.heading, user.length(), user.width())
}

/// Whether two rectangles overlap (touching counts).
pub fn detect_collision(a: &OrientedRect, b: &OrientedRect) -> bool {
    a.overlaps(b)
}

/// Kinematic state of one collision party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Party {
    pub pose: Pose,
    pub v: f64,
    pub mass: f64,
    pub protected: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizedHarm {
    pub delta_v: (f64, f64),
    pub harm: (f64, f64),
    pub areas: (ImpactArea, ImpactArea),
}

/// Harm to both parties of a collision that happened.
pub fn realize_harm(a: &Party, b: &Party, model: &HarmModel) -> RealizedHarm {
    let alpha = wrap_angle(a.pose.heading - b.pose.heading);
    let (dv_a, dv_b) = delta_v(a.mass, b.mass, a.v, b.v, alpha);
    let rel_v = (
        b.v * b.pose.heading.cos() - a.v * a.pose.heading.cos(),
        b.v * b.pose.heading.sin() - a.v * a.pose.heading.sin(),
    );
    let (area_a, area_b) = impact_areas(a.pose, b.pose, rel_v);
    RealizedHarm {
        delta_v: (dv_a, dv_b),
        harm: (
            model.harm(dv_a, a.protected, area_a),
            model.harm(dv_b, b.protected, area_b),
        ),
        areas: (area_a, area_b),
    }
}

fn collisions_at(
    t: f64,
    ego: &EgoRecord,
    scenario: &Scenario,
    model: &HarmModel,
) -> Vec<CollisionEvent> {
    let e = &scenario.ego;
    let ego_rect = OrientedRect::new(
        ego.x,
        ego.y,
        ego.heading,
        e.dimensions.length,
        e.dimensions.width,
    );
    let ego_party = Party {
        pose: Pose::new(ego.x, ego.y, ego.heading),
        v: ego.v,
        mass: e.mass,
        protected: true,
    };
    scenario
        .agents
        .iter()
        .filter_map(|user| {
            let s = user.state_at(t);
            if !detect_collision(&ego_rect, &rect_of(user, &s)) {
                return None;
            }
            let other = Party {
                pose: Pose::new(s.x, s.y, s.heading),
                v: s.v,
                mass: user.mass(),
                protected: user.protected(),
            };
            let h = realize_harm(&ego_party, &other, model);
            Some(CollisionEvent {
                t,
                user_id: user.id.clone(),
                user_class: user.class,
                delta_v_ego: h.delta_v.0,
                delta_v_user: h.delta_v.1,
                harm_ego: h.harm.0,
                harm_user: h.harm.1,
                area_ego: h.areas.0,
                area_user: h.areas.1,
            })
        })
        .collect()
}

fn ego_record(st: &crate::frenet::TrajectoryState) -> EgoRecord {
    EgoRecord {
        x: st.x,
        y: st.y,
        heading: st.heading,
        v: st.v,
        a: st.a,
        lat_acc: st.lat_acc,
        jerk: st.jerk(),
        s: st.s,
        d: st.d,
    }
}

pub fn run(scenario: &Scenario, config: &PlannerConfig, seed: u64) -> Result<SimulationLog> {
    run_with(scenario, config, seed, RunOptions::default())
}

/// Runs the closed loop until the scenario ends, the ego collides, the step
/// cap is hit or the planner faults. The planner itself uses no randomness;
/// `seed` is only recorded.
pub fn run_with(
    scenario: &Scenario,
    config: &PlannerConfig,
    seed: u64,
    options: RunOptions,
) -> Result<SimulationLog> {
    scenario.validate()?;
    let planner = Planner::new(scenario, config)?;
    let dt = scenario.dt;
    let duration = scenario.duration();
    let last_step = (duration / dt + 1e-9).floor() as usize;
    let mut users: Vec<UserInfo> = scenario
        .agents
        .iter()
        .map(|a| UserInfo {
            id: a.id.clone(),
            class: a.class,
        })
        .collect();
    users.sort_by(|a, b| a.id.cmp(&b.id));
    let header = LogHeader {
        scenario: scenario.id.clone(),
        profile: config.ethics.profile,
        seed,
        dt,
        duration,
        ego_id: scenario.ego.id.clone(),
        users,
    };

    let mut state = planner.initial_state();
    let mut steps = Vec::new();
    let mut collisions = Vec::new();
    let mut status = RunStatus::Finished;
    let mut fault = None;

    for k in 0..=last_step {
        let t = k as f64 * dt;
        if options.max_steps.is_some_and(|m| k >= m) {
            status = RunStatus::Timeout;
            break;
        }
        let cycle = match planner.plan(t, &state) {
            Ok(c) => c,
            Err(e) => {
                status = RunStatus::Fault;
                fault = Some(e.to_string());
                break;
            }
        };
        let chosen = cycle.chosen();
        let here = ego_record(&chosen.sample.states[0]);
        if k == 0 {
            collisions = collisions_at(t, &here, scenario, &config.harm);
        }
        let next_state = &chosen.sample.states[1];
        steps.push(StepRecord {
            step: k,
            t,
            ego: here,
            sample_id: chosen.sample.id,
            level: chosen.level,
            cost: chosen.cost.total,
            risks: chosen
                .ledger
                .users
                .iter()
                .map(|u| UserRiskRecord {
                    user_id: u.user_id.clone(),
                    risk: u.risk_user,
                    risk_ego: u.risk_ego,
                    max_probability: u.max_probability(),
                })
                .collect(),
            ego_risk: chosen.ledger.ego_risk(),
            ego_combined: chosen.ledger.ego_combined,
            next: ego_record(next_state),
        });
        if !collisions.is_empty() {
            status = RunStatus::Collided;
            break;
        }
        if k == last_step {
            break;
        }
        state = next_state.frenet();
        collisions = collisions_at(
            (k + 1) as f64 * dt,
            &ego_record(next_state),
            scenario,
            &config.harm,
        );
    }
    if status == RunStatus::Finished && !collisions.is_empty() {
        status = RunStatus::Collided;
    }

    Ok(SimulationLog {
        header,
        summary: LogSummary {
            status,
            steps: steps.len(),
            collisions,
            fault,
        },
        steps,
    })
}
