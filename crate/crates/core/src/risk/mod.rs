//! Collision probability, harm and per-road-user risk of ego candidates.

mod harm;
mod probability;

pub use harm::{
    delta_v, harm, impact_areas, AreaOffsets, HarmCoefficients, HarmModel, ImpactArea,
    LogisticCoefficients,
};
pub use probability::{aligned_half_extents, box_probability, collision_probability, Footprint};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::TrajectorySample;
use crate::geometry::{wrap_angle, Pose};
use crate::prediction::PredictedTrajectory;
use crate::scenario::{Scenario, UserClass};

/// Risk of a trajectory: the largest per-step product `p_k * H_k`.
pub fn trajectory_risk(probabilities: &[f64], harms: &[f64]) -> Result<f64> {
    if probabilities.len() != harms.len() {
        return Err(Error::Input(format!(
            "probability series has {} entries, harm series {}",
            probabilities.len(),
            harms.len()
        )));
    }
    Ok(probabilities
        .iter()
        .zip(harms)
        .map(|(p, h)| p * h)
        .fold(0.0, f64::max))
}

/// Combines risks of independent collisions: `1 - prod(1 - R_i)`.
pub fn combined_ego_risk(risks: &[f64]) -> f64 {
    // Log domain keeps small risks from cancelling against 1.
    let log_survival: f64 = risks.iter().map(|r| (-r).ln_1p()).sum();
    0.0 - log_survival.exp_m1()
}

/// Risk bookkeeping between the ego and one road user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRisk {
    pub user_id: String,
    pub class: UserClass,
    /// Collision probability per step `k = 1..N`.
    pub probability: Vec<f64>,
    /// Harm to the road user per step, should the collision happen.
    pub harm_user: Vec<f64>,
    /// Harm to the ego occupants per step.
    pub harm_ego: Vec<f64>,
    /// Impact areas `(ego, user)` per step.
    pub areas: Vec<(ImpactArea, ImpactArea)>,
    pub risk_user: f64,
    pub risk_ego: f64,
    /// Step index (into the series) of the largest user risk.
    pub peak_step: usize,
}

impl UserRisk {
    pub fn max_probability(&self) -> f64 {
        self.probability.iter().copied().fold(0.0, f64::max)
    }

    /// Largest harm to the user over steps whose collision probability is at
    /// least `floor`; zero when no step qualifies.
    pub fn max_harm_user(&self, floor: f64) -> f64 {
        max_harm_where(&self.probability, &self.harm_user, floor)
    }

    pub fn max_harm_ego(&self, floor: f64) -> f64 {
        max_harm_where(&self.probability, &self.harm_ego, floor)
    }
}

fn max_harm_where(p: &[f64], h: &[f64], floor: f64) -> f64 {
    p.iter()
        .zip(h)
        .filter(|(p, _)| **p >= floor && **p > 0.0)
        .map(|(_, h)| *h)
        .fold(0.0, f64::max)
}

/// Per-candidate risk assignment for every road user, ordered by user id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskLedger {
    pub users: Vec<UserRisk>,
    /// Combined ego risk over independent collisions.
    pub ego_combined: f64,
}

impl RiskLedger {
    pub fn empty() -> Self {
        Self {
            users: Vec::new(),
            ego_combined: 0.0,
        }
    }

    /// The ego's own scalar risk: its worst pairwise risk.
    pub fn ego_risk(&self) -> f64 {
        self.users.iter().map(|u| u.risk_ego).fold(0.0, f64::max)
    }

    pub fn max_probability(&self) -> f64 {
        self.users
            .iter()
            .map(UserRisk::max_probability)
            .fold(0.0, f64::max)
    }

    pub fn max_user_risk(&self) -> f64 {
        self.users.iter().map(|u| u.risk_user).fold(0.0, f64::max)
    }
}

/// Assigns collision probabilities, harms and risks for one candidate.
///
/// `predictions` must share the candidate's time grid: prediction step `k`
/// (lookahead `k dt`) pairs with candidate state `k`.
pub fn assess(
    sample: &TrajectorySample,
    predictions: &[PredictedTrajectory],
    scenario: &Scenario,
    harm_model: &HarmModel,
) -> Result<RiskLedger> {
    let ego = &scenario.ego;
    let ego_fp = Footprint {
        length: ego.dimensions.length,
        width: ego.dimensions.width,
    };
    let mut order: Vec<&PredictedTrajectory> = predictions.iter().collect();
    order.sort_by(|a, b| a.user_id.cmp(&b.user_id));

    let mut users = Vec::with_capacity(order.len());
    for pred in order {
        let user = scenario.agent(&pred.user_id).ok_or_else(|| {
            Error::Input(format!("prediction for unknown road user {}", pred.user_id))
        })?;
        if pred.steps.len() + 1 != sample.states.len() {
            return Err(Error::Input(format!(
                "prediction for {} has {} steps, candidate has {}",
                pred.user_id,
                pred.steps.len(),
                sample.states.len() - 1
            )));
        }
        let fp = Footprint {
            length: user.length(),
            width: user.width(),
        };
        let n = pred.steps.len();
        let mut ur = UserRisk {
            user_id: user.id.clone(),
            class: user.class,
            probability: Vec::with_capacity(n),
            harm_user: Vec::with_capacity(n),
            harm_ego: Vec::with_capacity(n),
            areas: Vec::with_capacity(n),
            risk_user: 0.0,
            risk_ego: 0.0,
            peak_step: 0,
        };
        for (st, step) in sample.states[1..].iter().zip(&pred.steps) {
            let ego_pose = Pose::new(st.x, st.y, st.heading);
            let other_pose = Pose::new(step.mean_x, step.mean_y, step.heading);
            let p = collision_probability(
                ego_pose,
                ego_fp,
                (step.mean_x, step.mean_y),
                step.heading,
                fp,
                &step.cov,
            )?;
            let alpha = wrap_angle(st.heading - step.heading);
            let (dv_ego, dv_user) = delta_v(ego.mass, user.mass(), st.v, step.v, alpha);
            let rel_v = (
                step.v * step.heading.cos() - st.v * st.heading.cos(),
                step.v * step.heading.sin() - st.v * st.heading.sin(),
            );
            let (area_ego, area_user) = impact_areas(ego_pose, other_pose, rel_v);
            ur.probability.push(p);
            ur.harm_user
                .push(harm_model.harm(dv_user, user.protected(), area_user));
            ur.harm_ego.push(harm_model.harm(dv_ego, true, area_ego));
            ur.areas.push((area_ego, area_user));
        }
        ur.risk_user = trajectory_risk(&ur.probability, &ur.harm_user)?;
        ur.risk_ego = trajectory_risk(&ur.probability, &ur.harm_ego)?;
        ur.peak_step = ur
            .probability
            .iter()
            .zip(&ur.harm_user)
            .enumerate()
            .fold(
                (0, -1.0),
                |best, (k, (p, h))| {
                    if p * h > best.1 {
                        (k, p * h)
                    } else {
                        best
                    }
                },
            )
            .0;
        users.push(ur);
    }
    let ego_risks: Vec<f64> = users.iter().map(|u| u.risk_ego).collect();
    Ok(RiskLedger {
        ego_combined: combined_ego_risk(&ego_risks),
        users,
    })
}
