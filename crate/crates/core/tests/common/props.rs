//! Randomized invariants, shared by the property tests and the acceptance
//! suite. Every check runs `CASES` cases from a fixed seed.

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use riskethics::ethics::{
    bayes_cost, equality_cost, maximin_cost, responsibility_cost, risk_cost, select, EthicsConfig,
    Profile, Scored, ValidityLevel,
};
use riskethics::frenet::build_frame;
use riskethics::responsibility::{
    reachable_set_from_state, ResponsibilityParams, ResponsibilityShare,
};
use riskethics::risk::{
    combined_ego_risk, harm, trajectory_risk, ImpactArea, LogisticCoefficients, RiskLedger,
    UserRisk,
};
use riskethics::scenario::{AgentState, RoadUser, ScriptPoint, UserClass};

use super::straight_road;

pub const CASES: u32 = 1000;

pub type Check = fn() -> Result<(), String>;

pub const ALL: [(&str, Check); 9] = [
    (
        "permutation invariance of bayes/equality/maximin",
        permutation_invariance,
    ),
    ("equality bounds and zero iff equal", equality_bounds),
    ("homogeneity of bayes/equality/responsibility", homogeneity),
    (
        "combined ego risk between max and min(1, sum)",
        combined_bounds,
    ),
    (
        "trajectory risk monotone in p and H",
        trajectory_risk_monotone,
    ),
    ("harm monotone in delta-v", harm_monotone),
    (
        "risk cost nonnegative with r_cap < 1",
        risk_cost_nonnegative,
    ),
    ("selection: level dominates cost", level_dominance),
    ("legal reachable set inside physical", legal_inside_physical),
];

fn runner() -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn risks(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..=1.0f64, 1..max_len)
}

pub fn permutation_invariance() -> Result<(), String> {
    let s = risks(12).prop_flat_map(|v| (Just(v.clone()), Just(v).prop_shuffle(), 1.0..4.0f64));
    check(s, |(a, b, gamma)| {
        prop_assert!(close(bayes_cost(&a), bayes_cost(&b), 1e-12));
        prop_assert!(close(equality_cost(&a), equality_cost(&b), 1e-12));
        prop_assert_eq!(maximin_cost(&a, gamma), maximin_cost(&b, gamma));
        Ok(())
    })
}

pub fn equality_bounds() -> Result<(), String> {
    let s = prop_oneof![
        (0.0..=1.0f64, 1..10usize).prop_map(|(x, n)| vec![x; n]),
        risks(10),
    ];
    check(s, |r| {
        let j = equality_cost(&r);
        let lo = r.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert!(j <= (hi - lo) * (1.0 + 1e-12));
        prop_assert_eq!(j == 0.0, lo == hi, "J_E = {} for {:?}", j, r);
        Ok(())
    })
}

pub fn homogeneity() -> Result<(), String> {
    let s = risks(10).prop_flat_map(|r| {
        let n = r.len();
        (Just(r), prop::collection::vec(0.0..0.9f64, n), 0.0..10.0f64)
    });
    check(s, |(r, shares, lambda)| {
        let scaled: Vec<f64> = r.iter().map(|x| lambda * x).collect();
        prop_assert!(close(bayes_cost(&scaled), lambda * bayes_cost(&r), 1e-12));
        prop_assert!(close(
            equality_cost(&scaled),
            lambda * equality_cost(&r),
            1e-12
        ));
        prop_assert!(close(
            responsibility_cost(&scaled, &shares),
            lambda * responsibility_cost(&r, &shares),
            1e-12
        ));
        Ok(())
    })
}

pub fn combined_bounds() -> Result<(), String> {
    check(risks(10), |r| {
        let c = combined_ego_risk(&r);
        let max = r.iter().copied().fold(0.0, f64::max);
        let sum: f64 = r.iter().sum();
        prop_assert!(c >= max * (1.0 - 1e-12), "{} < max {}", c, max);
        prop_assert!(
            c <= sum.min(1.0) * (1.0 + 1e-12),
            "{} > {}",
            c,
            sum.min(1.0)
        );
        Ok(())
    })
}

pub fn trajectory_risk_monotone() -> Result<(), String> {
    let s = (1..20usize).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0..=1.0f64, n),
            prop::collection::vec(0.0..=1.0f64, n),
            0..n,
            0.0..1.0f64,
            any::<bool>(),
        )
    });
    check(s, |(p, h, k, bump, on_p)| {
        let base = trajectory_risk(&p, &h).unwrap();
        let (mut p2, mut h2) = (p.clone(), h.clone());
        if on_p {
            p2[k] = (p2[k] + bump).min(1.0);
        } else {
            h2[k] = (h2[k] + bump).min(1.0);
        }
        prop_assert!(trajectory_risk(&p2, &h2).unwrap() >= base);
        Ok(())
    })
}

pub fn harm_monotone() -> Result<(), String> {
    let s = (
        0.0..60.0f64,
        0.0..30.0f64,
        1.0..8.0f64,
        0.05..0.5f64,
        -1.0..1.0f64,
    );
    check(s, |(dv, step, c0, c1, c_area)| {
        let c = LogisticCoefficients { c0, c1, c_area };
        let (a, b) = (harm(dv, &c), harm(dv + step, &c));
        prop_assert!(a <= b && (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        Ok(())
    })
}

fn user_risk(i: usize, p: Vec<f64>, hu: Vec<f64>, he: Vec<f64>) -> UserRisk {
    let risk_user = trajectory_risk(&p, &hu).unwrap();
    let risk_ego = trajectory_risk(&p, &he).unwrap();
    UserRisk {
        user_id: format!("u{i}"),
        class: UserClass::Car,
        areas: vec![(ImpactArea::Front, ImpactArea::Rear); p.len()],
        probability: p,
        harm_user: hu,
        harm_ego: he,
        risk_user,
        risk_ego,
        peak_step: 0,
    }
}

pub fn risk_cost_nonnegative() -> Result<(), String> {
    let unit = || prop::collection::vec(0.0..=1.0f64, 4);
    let users = prop::collection::vec(
        (
            unit(),
            unit(),
            unit(),
            (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64),
        ),
        0..6,
    );
    let weights = (0.0..5.0f64, 0.0..5.0f64, 0.0..5.0f64, 1.0..4.0f64);
    check(
        (users, weights, 0.0..1.0f64),
        |(users, (wb, we, wm, gamma), cap)| {
            let mut ledger = RiskLedger::empty();
            let mut shares = Vec::new();
            for (i, (p, hu, he, (a, b, c))) in users.into_iter().enumerate() {
                let u = user_risk(i, p, hu, he);
                shares.push(ResponsibilityShare::combine(
                    &u.user_id, a, b, c, false, cap,
                ));
                ledger.users.push(u);
            }
            let ego: Vec<f64> = ledger.users.iter().map(|u| u.risk_ego).collect();
            ledger.ego_combined = combined_ego_risk(&ego);
            let config = EthicsConfig {
                w_bayes: wb,
                w_equality: we,
                w_maximin: wm,
                gamma,
                ..EthicsConfig::default()
            };
            for profile in Profile::ALL {
                let cost = risk_cost(
                    &ledger,
                    &shares,
                    &EthicsConfig {
                        profile,
                        ..config.clone()
                    },
                );
                prop_assert!(cost.total >= 0.0, "{:?} {:?}", profile, cost);
            }
            Ok(())
        },
    )
}

const LEVELS: [ValidityLevel; 4] = [
    ValidityLevel::Valid,
    ValidityLevel::RiskExceeded,
    ValidityLevel::UnavoidableCollision,
    ValidityLevel::Infeasible,
];

pub fn level_dominance() -> Result<(), String> {
    // Costs on a coarse grid so that ties occur.
    let cand = (0..4usize, 0..8u32, 0..4u32)
        .prop_map(|(l, c, e)| (LEVELS[l], c as f64 / 4.0, e as f64 / 8.0));
    check(prop::collection::vec(cand, 1..30), |raw| {
        let cands: Vec<Scored> = raw
            .iter()
            .enumerate()
            .map(|(id, &(level, cost, ego_combined))| Scored {
                id,
                level,
                cost,
                ego_combined,
            })
            .collect();
        let chosen = cands[select(&cands).unwrap()];
        let best_level = cands.iter().map(|c| c.level).min().unwrap();
        prop_assert_eq!(chosen.level, best_level);
        let tier: Vec<&Scored> = cands.iter().filter(|c| c.level == best_level).collect();
        let best_cost = tier.iter().map(|c| c.cost).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(chosen.cost, best_cost);
        let best_ego = tier
            .iter()
            .filter(|c| c.cost == best_cost)
            .map(|c| c.ego_combined)
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(chosen.ego_combined, best_ego);
        Ok(())
    })
}

pub fn legal_inside_physical() -> Result<(), String> {
    let classes = prop_oneof![
        Just(UserClass::Car),
        Just(UserClass::Truck),
        Just(UserClass::Cyclist),
        Just(UserClass::Pedestrian),
    ];
    let s = (
        classes,
        (1..4u32, 2.5..4.0f64),
        (0.0..150.0f64, -8.0..14.0f64, -3.2..3.2f64, 0.0..40.0f64),
        1..20usize,
    );
    check(
        s,
        |(class, (lanes, lane_width), (x, y, heading, v), steps)| {
            let scenario = straight_road("reach", lanes, lane_width, "");
            let frame = build_frame(&scenario.reference_line).unwrap();
            let user = RoadUser::new(
                "u",
                class,
                None,
                None,
                vec![ScriptPoint {
                    t: 0.0,
                    x,
                    y,
                    heading,
                    v,
                }],
            );
            let state = AgentState { x, y, heading, v };
            let set = reachable_set_from_state(
                &user,
                state,
                &scenario,
                &frame,
                steps,
                0.2,
                &ResponsibilityParams::default(),
            );
            prop_assert_eq!(set.steps.len(), steps + 1);
            for (k, step) in set.steps.iter().enumerate() {
                prop_assert!(
                    step.physical.contains_box(&step.legal),
                    "step {}: {:?}",
                    k,
                    step
                );
            }
            Ok(())
        },
    )
}
