//! Validity levels, ethical risk costs and trajectory selection.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frenet::{ComfortCost, MobilityCost, TrajectorySample};
use crate::responsibility::ResponsibilityShare;
use crate::risk::RiskLedger;

/// Which road users a planner accounts risk for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Every road user including the ego.
    Ethical,
    /// The ego only.
    Selfish,
    /// No risk term and no risk gate.
    Standard,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Ethical, Profile::Selfish, Profile::Standard];

    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Ethical => "ethical",
            Profile::Selfish => "selfish",
            Profile::Standard => "standard",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ethical" => Ok(Profile::Ethical),
            "selfish" => Ok(Profile::Selfish),
            "standard" => Ok(Profile::Standard),
            other => Err(Error::config(
                "ethics.profile",
                format!("unknown profile `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EthicsConfig {
    pub profile: Profile,
    pub w_bayes: f64,
    pub w_equality: f64,
    pub w_maximin: f64,
    /// Discount exponent of the maximin term.
    pub gamma: f64,
    /// Maximum acceptable risk.
    pub r_max: f64,
    /// Collision probability above which a collision counts as unavoidable.
    pub p_collision_hard: f64,
    /// Collision probability below which a step's harm is left out of the
    /// maximin harm set.
    pub harm_probability_floor: f64,
    pub w_comfort: f64,
    pub w_mobility: f64,
}

impl Default for EthicsConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Ethical,
            w_bayes: 1.0,
            w_equality: 1.0,
            w_maximin: 1.0,
            gamma: 2.0,
            r_max: 0.05,
            p_collision_hard: 0.9,
            harm_probability_floor: 1e-3,
            w_comfort: 0.002,
            w_mobility: 0.01,
        }
    }
}

impl EthicsConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("w_bayes", self.w_bayes),
            ("w_equality", self.w_equality),
            ("w_maximin", self.w_maximin),
            ("w_comfort", self.w_comfort),
            ("w_mobility", self.w_mobility),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("ethics.{name}"), "must be >= 0"));
            }
        }
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return Err(Error::config("ethics.gamma", "must be >= 1"));
        }
        if !(self.r_max > 0.0 && self.r_max <= 1.0) {
            return Err(Error::config("ethics.r_max", "must lie in (0, 1]"));
        }
        if !(self.p_collision_hard > 0.0 && self.p_collision_hard <= 1.0) {
            return Err(Error::config(
                "ethics.p_collision_hard",
                "must lie in (0, 1]",
            ));
        }
        if !(0.0..=1.0).contains(&self.harm_probability_floor) {
            return Err(Error::config(
                "ethics.harm_probability_floor",
                "must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Quality tier of a candidate, best first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidityLevel {
    Valid,
    RiskExceeded,
    UnavoidableCollision,
    Infeasible,
}

impl ValidityLevel {
    pub fn index(self) -> u8 {
        self as u8
    }
}

pub fn classify(
    sample: &TrajectorySample,
    ledger: &RiskLedger,
    config: &EthicsConfig,
) -> ValidityLevel {
    if !sample.feasible() {
        return ValidityLevel::Infeasible;
    }
    if ledger.max_probability() > config.p_collision_hard {
        return ValidityLevel::UnavoidableCollision;
    }
    let exceeded = match config.profile {
        Profile::Ethical => {
            ledger.ego_combined > config.r_max || ledger.max_user_risk() > config.r_max
        }
        Profile::Selfish => ledger.ego_combined > config.r_max,
        Profile::Standard => false,
    };
    if exceeded {
        ValidityLevel::RiskExceeded
    } else {
        ValidityLevel::Valid
    }
}

/// Mean risk; zero for an empty set.
pub fn bayes_cost(risks: &[f64]) -> f64 {
    if risks.is_empty() {
        return 0.0;
    }
    risks.iter().sum::<f64>() / risks.len() as f64
}

/// Sum of pairwise absolute risk differences over the number of pairs.
/// Exactly zero iff all risks are equal.
pub fn equality_cost(risks: &[f64]) -> f64 {
    let n = risks.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for (i, a) in risks.iter().enumerate() {
        for b in &risks[i + 1..] {
            sum += (a - b).abs();
        }
    }
    sum / (n * (n - 1) / 2) as f64
}

/// Discounted worst-case harm; zero for an empty set.
pub fn maximin_cost(harms: &[f64], gamma: f64) -> f64 {
    if harms.is_empty() {
        return 0.0;
    }
    harms.iter().copied().fold(0.0, f64::max).powf(gamma)
}

/// Responsibility-weighted risk, normalized like the Bayes term.
pub fn responsibility_cost(risks: &[f64], shares: &[f64]) -> f64 {
    if risks.is_empty() {
        return 0.0;
    }
    risks.iter().zip(shares).map(|(r, s)| r * s).sum::<f64>() / risks.len() as f64
}

/// The sets the principles are evaluated on for one candidate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RiskSets {
    pub risks: Vec<f64>,
    pub harms: Vec<f64>,
    pub shares: Vec<f64>,
}

/// Builds the profile's risk, harm and share sets. The ego enters with its
/// worst pairwise risk and harm and never with a responsibility share.
pub fn risk_sets(
    ledger: &RiskLedger,
    shares: &[ResponsibilityShare],
    config: &EthicsConfig,
) -> RiskSets {
    let floor = config.harm_probability_floor;
    let ego_harm = ledger
        .users
        .iter()
        .map(|u| u.max_harm_ego(floor))
        .fold(0.0, f64::max);
    match config.profile {
        Profile::Standard => RiskSets::default(),
        Profile::Selfish => RiskSets {
            risks: vec![ledger.ego_risk()],
            harms: vec![ego_harm],
            shares: vec![0.0],
        },
        Profile::Ethical => {
            let mut sets = RiskSets {
                risks: vec![ledger.ego_risk()],
                harms: vec![ego_harm],
                shares: vec![0.0],
            };
            for u in &ledger.users {
                sets.risks.push(u.risk_user);
                sets.harms.push(u.max_harm_user(floor));
                sets.shares.push(
                    shares
                        .iter()
                        .find(|s| s.user_id == u.user_id)
                        .map_or(0.0, |s| s.r_total),
                );
            }
            sets
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RiskCost {
    pub bayes: f64,
    pub equality: f64,
    pub maximin: f64,
    pub responsibility: f64,
    /// `w_B J_B + w_E J_E + w_M J_M - w_B J_R`.
    pub total: f64,
}

pub fn risk_cost(
    ledger: &RiskLedger,
    shares: &[ResponsibilityShare],
    config: &EthicsConfig,
) -> RiskCost {
    if config.profile == Profile::Standard {
        return RiskCost::default();
    }
    let sets = risk_sets(ledger, shares, config);
    combine_risk_cost(&sets, config)
}

pub fn combine_risk_cost(sets: &RiskSets, config: &EthicsConfig) -> RiskCost {
    let bayes = bayes_cost(&sets.risks);
    let equality = equality_cost(&sets.risks);
    let maximin = maximin_cost(&sets.harms, config.gamma);
    let responsibility = responsibility_cost(&sets.risks, &sets.shares);
    RiskCost {
        bayes,
        equality,
        maximin,
        responsibility,
        total: config.w_bayes * bayes + config.w_equality * equality + config.w_maximin * maximin
            - config.w_bayes * responsibility,
    }
}

/// Cost components of one candidate, already weighted.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostLedger {
    pub risk: RiskCost,
    pub comfort: ComfortCost,
    pub mobility: MobilityCost,
    pub comfort_weighted: f64,
    pub mobility_weighted: f64,
    pub total: f64,
}

/// Full cost at the valid level; risk only at every other level.
pub fn total_cost(level: ValidityLevel, risk: f64, comfort: f64, mobility: f64) -> f64 {
    match level {
        ValidityLevel::Valid => risk + comfort + mobility,
        _ => risk,
    }
}

pub fn cost_ledger(
    level: ValidityLevel,
    risk: RiskCost,
    comfort: ComfortCost,
    mobility: MobilityCost,
    config: &EthicsConfig,
) -> CostLedger {
    let comfort_weighted = config.w_comfort * comfort.total();
    let mobility_weighted = config.w_mobility * mobility.total();
    CostLedger {
        risk,
        comfort,
        mobility,
        comfort_weighted,
        mobility_weighted,
        total: total_cost(level, risk.total, comfort_weighted, mobility_weighted),
    }
}

/// What selection needs to know about a candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scored {
    pub id: usize,
    pub level: ValidityLevel,
    pub cost: f64,
    pub ego_combined: f64,
}

fn rank(a: &Scored, b: &Scored) -> Ordering {
    a.level
        .cmp(&b.level)
        .then(a.cost.total_cmp(&b.cost))
        .then(a.ego_combined.total_cmp(&b.ego_combined))
        .then(a.id.cmp(&b.id))
}

/// Index of the candidate to execute: best level, then lowest cost, then
/// lowest ego combined risk, then lowest id.
pub fn select(candidates: &[Scored]) -> Result<usize> {
    candidates
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| rank(a, b))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::PlannerFault("no candidate trajectories".into()))
}
