use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ethics::Profile;
use crate::scenario::UserClass;
use crate::simulator::{RunStatus, SimulationLog};

/// Road-user groups of the reports. Vulnerable users also count as third
/// parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "Ego-AV")]
    EgoAv,
    #[serde(rename = "ThirdParty")]
    ThirdParty,
    #[serde(rename = "VRU")]
    Vru,
}

impl Group {
    pub const ALL: [Group; 3] = [Group::EgoAv, Group::ThirdParty, Group::Vru];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::EgoAv => "Ego-AV",
            Group::ThirdParty => "ThirdParty",
            Group::Vru => "VRU",
        }
    }

    /// Membership of a non-ego road user.
    pub fn contains(self, class: UserClass) -> bool {
        match self {
            Group::EgoAv => false,
            Group::ThirdParty => true,
            Group::Vru => class.is_vulnerable(),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn class_of(log: &SimulationLog, id: &str) -> Option<UserClass> {
    log.header
        .users
        .iter()
        .find(|u| u.id == id)
        .map(|u| u.class)
}

/// Every per-step risk value of the group's members in one log.
pub fn group_risks(log: &SimulationLog, group: Group) -> Vec<f64> {
    match group {
        Group::EgoAv => log.steps.iter().map(|s| s.ego_risk).collect(),
        _ => log
            .steps
            .iter()
            .flat_map(|s| &s.risks)
            .filter(|r| class_of(log, &r.user_id).is_some_and(|c| group.contains(c)))
            .map(|r| r.risk)
            .collect(),
    }
}

/// The `k` largest per-step risks of the group over all logs, descending.
pub fn top_k_risks(logs: &[SimulationLog], group: Group, k: usize) -> Vec<f64> {
    let mut all: Vec<f64> = logs.iter().flat_map(|l| group_risks(l, group)).collect();
    let k = k.min(all.len());
    if k == 0 {
        return Vec::new();
    }
    all.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    all.truncate(k);
    all.sort_by(|a, b| b.total_cmp(a));
    all
}

/// Realized harms of the group's members in one log.
fn group_harms(log: &SimulationLog, group: Group) -> impl Iterator<Item = f64> + '_ {
    log.summary
        .collisions
        .iter()
        .filter_map(move |c| match group {
            Group::EgoAv => Some(c.harm_ego),
            _ if group.contains(c.user_class) => Some(c.harm_user),
            _ => None,
        })
}

/// Sum of realized harms borne by members of the group.
pub fn cumulated_harm(logs: &[SimulationLog], group: Group) -> f64 {
    logs.iter()
        .flat_map(|l| group_harms(l, group))
        .fold(0.0, |a, b| a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub group: Group,
    /// Largest risks, descending.
    pub top_k: Vec<f64>,
    pub cumulated_harm: f64,
    /// Scenarios in which the group is present.
    pub scenario_count: usize,
    /// Collisions in which a group member was involved.
    pub collision_count: usize,
}

impl GroupMetrics {
    pub fn compute(logs: &[SimulationLog], group: Group, k: usize) -> Self {
        let present = |l: &SimulationLog| match group {
            Group::EgoAv => true,
            _ => l.header.users.iter().any(|u| group.contains(u.class)),
        };
        Self {
            group,
            top_k: top_k_risks(logs, group, k),
            cumulated_harm: cumulated_harm(logs, group),
            scenario_count: logs.iter().filter(|l| present(l)).count(),
            collision_count: logs.iter().map(|l| group_harms(l, group).count()).sum(),
        }
    }

    /// Mean of the `n` largest risks (fewer if fewer exist; 0 if none).
    pub fn mean_top(&self, n: usize) -> f64 {
        let n = n.min(self.top_k.len());
        if n == 0 {
            return 0.0;
        }
        self.top_k[..n].iter().sum::<f64>() / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetrics {
    pub profile: Profile,
    pub runs: usize,
    pub collisions: usize,
    pub faults: usize,
    pub groups: Vec<GroupMetrics>,
}

impl ProfileMetrics {
    /// Metrics over logs of one profile; order of `logs` is irrelevant up to
    /// floating-point summation order, so callers pass them sorted.
    pub fn compute(profile: Profile, logs: &[SimulationLog], k: usize) -> Self {
        Self {
            profile,
            runs: logs.len(),
            collisions: logs.iter().filter(|l| l.collided()).count(),
            faults: logs
                .iter()
                .filter(|l| l.summary.status == RunStatus::Fault)
                .count(),
            groups: Group::ALL
                .iter()
                .map(|&g| GroupMetrics::compute(logs, g, k))
                .collect(),
        }
    }

    pub fn group(&self, group: Group) -> &GroupMetrics {
        self.groups
            .iter()
            .find(|g| g.group == group)
            .expect("all groups are computed")
    }
}

/// One (scenario, profile) row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub scenario: String,
    pub profile: Profile,
    pub status: String,
    pub steps: usize,
    pub collisions: usize,
    pub max_risk_ego: f64,
    pub max_risk_third_party: f64,
    pub max_risk_vru: f64,
    pub harm_ego: f64,
    pub harm_third_party: f64,
    pub harm_vru: f64,
}

impl RunRow {
    pub fn from_log(log: &SimulationLog) -> Self {
        let max = |g| group_risks(log, g).into_iter().fold(0.0, f64::max);
        let harm = |g| group_harms(log, g).fold(0.0, |a, b| a + b);
        let status = serde_json::to_value(log.summary.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        Self {
            scenario: log.header.scenario.clone(),
            profile: log.header.profile,
            status,
            steps: log.summary.steps,
            collisions: log.summary.collisions.len(),
            max_risk_ego: max(Group::EgoAv),
            max_risk_third_party: max(Group::ThirdParty),
            max_risk_vru: max(Group::Vru),
            harm_ego: harm(Group::EgoAv),
            harm_third_party: harm(Group::ThirdParty),
            harm_vru: harm(Group::Vru),
        }
    }

    pub const CSV_HEADER: &'static str = "scenario,profile,status,steps,collisions,max_risk_ego,max_risk_third_party,max_risk_vru,harm_ego,harm_third_party,harm_vru";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.profile,
            self.status,
            self.steps,
            self.collisions,
            self.max_risk_ego,
            self.max_risk_third_party,
            self.max_risk_vru,
            self.harm_ego,
            self.harm_third_party,
            self.harm_vru
        )
    }
}
