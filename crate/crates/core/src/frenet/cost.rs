use serde::{Deserialize, Serialize};

use super::sampling::TrajectorySample;

/// Trapezoidal time average of `f` over the sample's states.
fn time_average(sample: &TrajectorySample, f: impl Fn(usize) -> f64) -> f64 {
    let n = sample.states.len();
    if n < 2 {
        return 0.0;
    }
    let dt = sample.states[1].t - sample.states[0].t;
    let inner: f64 = (1..n - 1).map(&f).sum();
    let integral = dt * (0.5 * f(0) + inner + 0.5 * f(n - 1));
    integral / sample.horizon()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComfortCost {
    pub jerk: f64,
    pub acceleration: f64,
}

impl ComfortCost {
    pub fn total(&self) -> f64 {
        self.jerk + self.acceleration
    }
}

/// Time-averaged squared jerk and squared acceleration in road coordinates.
pub fn comfort_cost(sample: &TrajectorySample) -> ComfortCost {
    let st = &sample.states;
    ComfortCost {
        jerk: time_average(sample, |k| st[k].s_ddd.powi(2) + st[k].d_ddd.powi(2)),
        acceleration: time_average(sample, |k| st[k].s_dd.powi(2) + st[k].d_dd.powi(2)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MobilityCost {
    /// Time-averaged squared deviation from the target speed.
    pub velocity: f64,
    /// Squared mean-speed shortfall against the best progress of the cycle.
    pub progress: f64,
}

impl MobilityCost {
    pub fn total(&self) -> f64 {
        self.velocity + self.progress
    }
}

/// Largest arc-length progress among feasible samples, or among all
/// samples when none is feasible.
pub fn best_progress(samples: &[TrajectorySample]) -> f64 {
    let feasible = samples
        .iter()
        .filter(|s| s.feasible())
        .map(TrajectorySample::progress)
        .fold(f64::NEG_INFINITY, f64::max);
    if feasible.is_finite() {
        feasible
    } else {
        samples
            .iter()
            .map(TrajectorySample::progress)
            .fold(0.0, f64::max)
    }
}

pub fn mobility_cost(
    sample: &TrajectorySample,
    target_velocity: f64,
    reference_progress: f64,
) -> MobilityCost {
    let st = &sample.states;
    let velocity = time_average(sample, |k| (st[k].v - target_velocity).powi(2));
    let horizon = sample.horizon();
    let shortfall = (reference_progress - sample.progress()).max(0.0);
    let progress = if horizon > 0.0 {
        (shortfall / horizon).powi(2)
    } else {
        0.0
    };
    MobilityCost { velocity, progress }
}
