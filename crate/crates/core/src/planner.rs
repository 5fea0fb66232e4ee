//! One planning cycle: predict, sample, assess, classify, cost, select.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PlannerConfig;
use crate::error::Result;
use crate::ethics::{
    classify, cost_ledger, risk_cost, select, CostLedger, Profile, Scored, ValidityLevel,
};
use crate::frenet::{
    best_progress, comfort_cost, mobility_cost, sample_trajectories, Corridor, FrenetFrame,
    FrenetState, SamplingSetup, TrajectorySample,
};
use crate::prediction::{predict, PredictedTrajectory};
use crate::responsibility::{assign_shares, reachable_set, ResponsibilityShare};
use crate::risk::{assess, RiskLedger};
use crate::scenario::Scenario;

/// A candidate with everything the planner computed for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedSample {
    pub sample: TrajectorySample,
    pub ledger: RiskLedger,
    pub shares: Vec<ResponsibilityShare>,
    pub level: ValidityLevel,
    pub cost: CostLedger,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningCycle {
    pub t: f64,
    pub candidates: Vec<EvaluatedSample>,
    /// Index into `candidates`.
    pub chosen: usize,
}

impl PlanningCycle {
    pub fn chosen(&self) -> &EvaluatedSample {
        &self.candidates[self.chosen]
    }

    pub fn count_at(&self, level: ValidityLevel) -> usize {
        self.candidates.iter().filter(|c| c.level == level).count()
    }
}

/// Planner bound to one scenario and configuration.
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    scenario: &'a Scenario,
    config: &'a PlannerConfig,
    frame: FrenetFrame,
}

impl<'a> Planner<'a> {
    pub fn new(scenario: &'a Scenario, config: &'a PlannerConfig) -> Result<Self> {
        config.validate()?;
        let frame = FrenetFrame::new(&scenario.reference_line)?;
        Ok(Self {
            scenario,
            config,
            frame,
        })
    }

    pub fn frame(&self) -> &FrenetFrame {
        &self.frame
    }

    /// The scenario's initial ego state in road coordinates.
    pub fn initial_state(&self) -> FrenetState {
        let e = &self.scenario.ego.state;
        self.frame
            .cartesian_to_frenet(e.x, e.y, e.heading, e.v, e.a)
    }

    pub fn predictions(&self, t0: f64) -> Vec<PredictedTrajectory> {
        let s = self.scenario;
        s.agents
            .iter()
            .map(|a| predict(a, t0, s.horizon, s.dt, &self.config.prediction))
            .collect()
    }

    /// Plans from `start` at simulation time `t0`.
    pub fn plan(&self, t0: f64, start: &FrenetState) -> Result<PlanningCycle> {
        let scenario = self.scenario;
        let cfg = self.config;
        let setup = SamplingSetup {
            dt: scenario.dt,
            steps: scenario.horizon_steps(),
            limits: scenario.ego.limits,
            corridor: Corridor::of(scenario),
        };
        let grid = cfg.sampling.grid(scenario);
        let samples = sample_trajectories(start, &self.frame, &grid, &setup)?;
        let predictions = self.predictions(t0);
        let use_shares = cfg.responsibility.enabled && cfg.ethics.profile == Profile::Ethical;
        let reach: Vec<_> = if use_shares {
            scenario
                .agents
                .iter()
                .map(|a| reachable_set(a, t0, scenario, &self.frame, &cfg.responsibility))
                .collect()
        } else {
            Vec::new()
        };
        let target = scenario.ego.target_velocity;
        // Progress beyond cruising at the target speed earns nothing.
        let horizon = samples.first().map_or(0.0, TrajectorySample::horizon);
        let reference = best_progress(&samples).min(target * horizon);

        let candidates = samples
            .into_par_iter()
            .map(|sample| {
                let ledger = assess(&sample, &predictions, scenario, &cfg.harm)?;
                let shares = if use_shares {
                    assign_shares(
                        &sample,
                        &ledger,
                        &predictions,
                        &reach,
                        scenario,
                        &self.frame,
                        &cfg.responsibility,
                    )
                } else {
                    Vec::new()
                };
                let level = classify(&sample, &ledger, &cfg.ethics);
                let risk = risk_cost(&ledger, &shares, &cfg.ethics);
                let cost = cost_ledger(
                    level,
                    risk,
                    comfort_cost(&sample),
                    mobility_cost(&sample, target, reference),
                    &cfg.ethics,
                );
                Ok(EvaluatedSample {
                    sample,
                    ledger,
                    shares,
                    level,
                    cost,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let scored: Vec<Scored> = candidates
            .iter()
            .map(|c| Scored {
                id: c.sample.id,
                level: c.level,
                cost: c.cost.total,
                ego_combined: c.ledger.ego_combined,
            })
            .collect();
        let chosen = select(&scored)?;
        Ok(PlanningCycle {
            t: t0,
            candidates,
            chosen,
        })
    }
}
