//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use riskethics::ethics::{
    bayes_cost, combine_risk_cost, equality_cost, maximin_cost, responsibility_cost, risk_cost,
    total_cost, EthicsConfig, RiskSets,
};
use riskethics::evaluation::{self, BatchOptions, BatchReport, Group};
use riskethics::frenet::TrajectorySample;
use riskethics::geometry::{wrap_angle, Pose};
use riskethics::prediction::Cov2;
use riskethics::risk::{
    collision_probability, combined_ego_risk, delta_v, harm, trajectory_risk, Footprint,
    LogisticCoefficients, RiskLedger,
};
use riskethics::simulator::{EgoRecord, SimulationLog};
use riskethics::{Planner, PlannerConfig, Profile, Scenario, ValidityLevel};

use common::{batch_config, bundled, bundled_suite, props, rel_close, scenario_glob};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

fn equation_examples() -> Outcome {
    let start = Instant::now();
    let protected = LogisticCoefficients {
        c0: 5.0,
        c1: 0.2,
        c_area: 0.0,
    };
    let pi = std::f64::consts::PI;
    let (a1, b1) = delta_v(1500.0, 1500.0, 10.0, 10.0, 0.0);
    let (a2, b2) = delta_v(1500.0, 1500.0, 10.0, 10.0, pi);
    let (a3, b3) = delta_v(1000.0, 2000.0, 20.0, 0.0, 0.0);

    // J_B = 0.2, J_E = 0.1, J_M = 0.25, J_R = 0.05 with unit weights.
    let sets = RiskSets {
        risks: vec![0.15, 0.25],
        harms: vec![0.3, 0.5],
        shares: vec![0.0, 0.4],
    };
    let eq7 = combine_risk_cost(&sets, &EthicsConfig::default());
    let no_shares = RiskSets {
        shares: vec![0.0, 0.0],
        ..sets.clone()
    };
    let eq7_plain = combine_risk_cost(&no_shares, &EthicsConfig::default());
    let standard = EthicsConfig {
        profile: Profile::Standard,
        ..EthicsConfig::default()
    };

    let cases: Vec<(&str, f64, f64)> = vec![
        ("dv co-moving a", a1, 0.0),
        ("dv co-moving b", b1, 0.0),
        ("dv head-on a", a2, 10.0),
        ("dv head-on b", b2, 10.0),
        ("dv stationary partner a", a3, 40.0 / 3.0),
        ("dv stationary partner b", b3, 20.0 / 3.0),
        (
            "harm at dv 0",
            harm(0.0, &protected),
            0.006_692_850_924_284_855_6,
        ),
        ("harm midpoint", harm(25.0, &protected), 0.5),
        ("harm limit", harm(1e4, &protected), 1.0),
        (
            "risk max of products",
            trajectory_risk(&[0.1, 0.2, 0.05], &[0.5, 0.2, 0.9]).unwrap(),
            0.05,
        ),
        (
            "risk all p zero",
            trajectory_risk(&[0.0; 4], &[0.3, 0.9, 0.1, 1.0]).unwrap(),
            0.0,
        ),
        (
            "risk single step",
            trajectory_risk(&[0.3], &[0.4]).unwrap(),
            0.12,
        ),
        ("combined pair", combined_ego_risk(&[0.1, 0.2]), 0.28),
        ("combined identity", combined_ego_risk(&[0.37]), 0.37),
        (
            "combined absorbing",
            combined_ego_risk(&[0.2, 1.0, 0.6]),
            1.0,
        ),
        ("bayes pair", bayes_cost(&[0.1, 0.3]), 0.2),
        ("bayes identity", bayes_cost(&[0.42]), 0.42),
        ("bayes duplicated", bayes_cost(&[0.1, 0.1, 0.3, 0.3]), 0.2),
        ("equality equal", equality_cost(&[0.5, 0.5]), 0.0),
        (
            "equality triple",
            equality_cost(&[0.1, 0.3, 0.5]),
            0.8 / 3.0,
        ),
        ("equality pair", equality_cost(&[0.2, 0.8]), 0.6),
        ("maximin gamma 1", maximin_cost(&[0.2, 0.5], 1.0), 0.5),
        ("maximin gamma 2", maximin_cost(&[0.2, 0.5], 2.0), 0.25),
        ("maximin empty", maximin_cost(&[], 2.0), 0.0),
        (
            "responsibility zero shares",
            responsibility_cost(&[0.3, 0.6], &[0.0, 0.0]),
            0.0,
        ),
        (
            "responsibility single",
            responsibility_cost(&[0.4], &[0.5]),
            0.2,
        ),
        (
            "responsibility pair",
            responsibility_cost(&[0.4, 0.4], &[0.5, 0.0]),
            0.1,
        ),
        ("risk cost unit weights", eq7.total, 0.5),
        (
            "risk cost without shares",
            eq7_plain.total,
            eq7_plain.bayes + eq7_plain.equality + eq7_plain.maximin,
        ),
        (
            "risk cost standard",
            risk_cost(&RiskLedger::empty(), &[], &standard).total,
            0.0,
        ),
        (
            "total cost valid",
            total_cost(ValidityLevel::Valid, 0.5, 0.2, 0.3),
            1.0,
        ),
        (
            "total cost risk exceeded",
            total_cost(ValidityLevel::RiskExceeded, 0.5, 0.2, 0.3),
            0.5,
        ),
        (
            "total cost standard valid",
            total_cost(ValidityLevel::Valid, 0.0, 0.2, 0.3),
            0.5,
        ),
    ];
    let failed: Vec<String> = cases
        .iter()
        .filter(|(_, got, want)| !rel_close(*got, *want, 1e-9))
        .map(|(name, got, want)| format!("{name}: {got} != {want}"))
        .collect();
    let elapsed = start.elapsed();
    ensure(failed.is_empty(), || failed.join("; "))?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} examples within 1e-9, {:?}",
        cases.len(),
        elapsed
    ))
}

// ---------------------------------------------------------------- 2

struct ProbabilityCase {
    ego: Pose,
    ego_fp: Footprint,
    mean: (f64, f64),
    heading: f64,
    other_fp: Footprint,
    sigma: (f64, f64, f64),
}

fn random_case(rng: &mut StdRng) -> ProbabilityCase {
    let ego = Pose::new(
        rng.random_range(-50.0..50.0),
        rng.random_range(-50.0..50.0),
        rng.random_range(-3.1..3.1),
    );
    let ego_fp = Footprint {
        length: rng.random_range(3.5..6.0),
        width: rng.random_range(1.5..2.3),
    };
    let other_fp = match rng.random_range(0..3) {
        0 => Footprint {
            length: 0.6,
            width: 0.6,
        },
        1 => Footprint {
            length: 1.8,
            width: 0.7,
        },
        _ => Footprint {
            length: rng.random_range(4.0..12.0),
            width: rng.random_range(1.8..2.6),
        },
    };
    // Offsets of a few metres keep the probability away from 0 and 1.
    let (r, phi) = (rng.random_range(0.0..7.0), rng.random_range(-3.1..3.1f64));
    ProbabilityCase {
        ego,
        ego_fp,
        mean: (ego.x + r * phi.cos(), ego.y + r * phi.sin()),
        heading: rng.random_range(-3.1..3.1),
        other_fp,
        sigma: (
            rng.random_range(0.1..2.5),
            rng.random_range(0.1..1.5),
            rng.random_range(-3.1..3.1),
        ),
    }
}

/// Fraction of Gaussian samples of the other centre that land inside the
/// ego-aligned Minkowski box.
fn monte_carlo(case: &ProbabilityCase, n: usize, rng: &mut StdRng) -> f64 {
    let (s_lon, s_lat, h) = case.sigma;
    let (sh, ch) = h.sin_cos();
    // Cholesky factor of R diag(s_lon^2, s_lat^2) R^T.
    let xx = s_lon * s_lon * ch * ch + s_lat * s_lat * sh * sh;
    let xy = (s_lon * s_lon - s_lat * s_lat) * sh * ch;
    let yy = s_lon * s_lon * sh * sh + s_lat * s_lat * ch * ch;
    let l11 = xx.sqrt();
    let l21 = xy / l11;
    let l22 = (yy - l21 * l21).max(0.0).sqrt();

    let rel = case.heading - case.ego.heading;
    let hx = 0.5 * case.ego_fp.length
        + 0.5 * (case.other_fp.length * rel.cos().abs() + case.other_fp.width * rel.sin().abs());
    let hy = 0.5 * case.ego_fp.width
        + 0.5 * (case.other_fp.length * rel.sin().abs() + case.other_fp.width * rel.cos().abs());
    let (se, ce) = case.ego.heading.sin_cos();
    let mut inside = 0usize;
    for _ in 0..n {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let wx = case.mean.0 + l11 * z1 - case.ego.x;
        let wy = case.mean.1 + l21 * z1 + l22 * z2 - case.ego.y;
        let lx = ce * wx + se * wy;
        let ly = -se * wx + ce * wy;
        if lx.abs() <= hx && ly.abs() <= hy {
            inside += 1;
        }
    }
    inside as f64 / n as f64
}

fn probability_oracle() -> Outcome {
    const SAMPLES: usize = 1_000_000;
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed);
    // The first case is the lateral-offset example: 2 m offset, unit lateral
    // sigma, combined half-width 1.9 m.
    let mut cases = vec![ProbabilityCase {
        ego: Pose::new(0.0, 0.0, 0.0),
        ego_fp: Footprint {
            length: 4.0,
            width: 1.8,
        },
        mean: (0.0, 2.0),
        heading: 0.0,
        other_fp: Footprint {
            length: 4.0,
            width: 2.0,
        },
        sigma: (0.5, 1.0, 0.0),
    }];
    while cases.len() < 50 {
        let c = random_case(&mut rng);
        cases.push(c);
    }
    let mut worst = 0.0f64;
    let mut nontrivial = 0;
    for (i, c) in cases.iter().enumerate() {
        let (s_lon, s_lat, h) = c.sigma;
        let cov = Cov2::from_axes(s_lon, s_lat, h);
        let p = collision_probability(c.ego, c.ego_fp, c.mean, c.heading, c.other_fp, &cov)
            .map_err(|e| format!("case {i}: {e}"))?;
        let mc = monte_carlo(c, SAMPLES, &mut rng);
        let sd = (mc * (1.0 - mc) / SAMPLES as f64).sqrt();
        let tol = 1e-3 + 3.0 * sd;
        if mc > 0.01 && mc < 0.99 {
            nontrivial += 1;
        }
        worst = worst.max((p - mc).abs() / tol);
        ensure((p - mc).abs() <= tol, || {
            format!("case {i}: quadrature {p} vs monte carlo {mc} (tolerance {tol})")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "50 configurations ({nontrivial} with 0.01 < p < 0.99), worst error {:.2} of tolerance, {:?}",
        worst, elapsed
    ))
}

// ---------------------------------------------------------------- 3

fn property_suite() -> Outcome {
    let start = Instant::now();
    let mut failed = Vec::new();
    for (name, check) in props::ALL {
        if let Err(e) = check() {
            failed.push(format!("{name}: {e}"));
        }
    }
    ensure(failed.is_empty(), || failed.join("; "))?;
    Ok(format!(
        "{} properties x {} cases, {:?}",
        props::ALL.len(),
        props::CASES,
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- 4

struct Manoeuvre {
    overtakes: bool,
    stays_behind: bool,
}

/// Position of a candidate relative to the predicted cyclist, in arc length.
fn manoeuvre(
    sample: &TrajectorySample,
    cyclist_s: &[f64],
    ego_half: f64,
    cyclist_half: f64,
) -> Manoeuvre {
    let last = sample.states.len() - 1;
    Manoeuvre {
        overtakes: sample.states[last].s > cyclist_s[last],
        stays_behind: sample
            .states
            .iter()
            .zip(cyclist_s)
            .all(|(st, c)| st.s + ego_half < c - cyclist_half),
    }
}

fn overtake_cyclist() -> Outcome {
    let scenario = bundled("overtake_cyclist");
    let cyclist = scenario.agent("cyclist").ok_or("no cyclist in scenario")?;
    let base = PlannerConfig::default();
    let mut lines = Vec::new();
    for (factor, expect_overtake) in [(1.0, false), (10.0, true)] {
        let mut cfg = base.clone();
        cfg.ethics.r_max = base.ethics.r_max * factor;
        let planner = Planner::new(&scenario, &cfg).map_err(|e| e.to_string())?;
        let cycle = planner
            .plan(0.0, &planner.initial_state())
            .map_err(|e| e.to_string())?;
        let prediction = planner
            .predictions(0.0)
            .into_iter()
            .find(|p| p.user_id == "cyclist")
            .ok_or("no cyclist prediction")?;
        let start = cyclist.state_at(0.0);
        let mut cyclist_s = vec![planner.frame().project(start.x, start.y).0];
        cyclist_s.extend(
            prediction
                .steps
                .iter()
                .map(|st| planner.frame().project(st.mean_x, st.mean_y).0),
        );
        let ego_half = 0.5 * scenario.ego.dimensions.length;
        let cyc_half = 0.5 * cyclist.length();

        let mut overtake_levels: BTreeMap<String, usize> = BTreeMap::new();
        for c in &cycle.candidates {
            if manoeuvre(&c.sample, &cyclist_s, ego_half, cyc_half).overtakes {
                *overtake_levels.entry(format!("{:?}", c.level)).or_default() += 1;
            }
        }
        let chosen = cycle.chosen();
        let m = manoeuvre(&chosen.sample, &cyclist_s, ego_half, cyc_half);
        if expect_overtake {
            ensure(m.overtakes && chosen.level == ValidityLevel::Valid, || {
                format!(
                    "r_max x{factor}: chosen {:?} at {:?} does not overtake",
                    chosen.sample.end, chosen.level
                )
            })?;
        } else {
            ensure(m.stays_behind && !m.overtakes, || {
                format!(
                    "r_max x{factor}: chosen {:?} does not stay behind",
                    chosen.sample.end
                )
            })?;
            ensure(!overtake_levels.contains_key("Valid"), || {
                format!("r_max x{factor}: valid overtakes exist: {overtake_levels:?}")
            })?;
            ensure(overtake_levels.contains_key("RiskExceeded"), || {
                format!("r_max x{factor}: no overtake demoted for risk: {overtake_levels:?}")
            })?;
        }
        lines.push(format!(
            "r_max {}: {} (overtake candidates {:?})",
            cfg.ethics.r_max,
            if m.overtakes {
                "overtakes"
            } else {
                "stays behind"
            },
            overtake_levels
        ));
    }
    Ok(lines.join("; "))
}

// ---------------------------------------------------------------- 5-8

struct SuiteRun {
    dir: tempfile::TempDir,
    report: BatchReport,
    elapsed: Duration,
}

fn run_suite(jobs: usize) -> Result<SuiteRun, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let options = BatchOptions {
        jobs,
        ..BatchOptions::default()
    };
    let start = Instant::now();
    let report = evaluation::batch(&scenario_glob(), &batch_config(), dir.path(), &options)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.failures.is_empty(), || {
        format!("batch failures: {:?}", report.failures)
    })?;
    ensure(!report.has_faults(), || "planner faults in batch".into())?;
    Ok(SuiteRun {
        dir,
        report,
        elapsed,
    })
}

fn suite_shape(suite: &[Scenario]) -> Result<(usize, usize), String> {
    let vru = suite
        .iter()
        .filter(|s| s.agents.iter().any(|a| a.class.is_vulnerable()))
        .count();
    ensure(suite.len() >= 20 && vru >= 8, || {
        format!("suite has {} scenarios, {vru} with VRUs", suite.len())
    })?;
    Ok((suite.len(), vru))
}

fn vru_and_ego_trend(run: &SuiteRun) -> Outcome {
    let (n, vru) = suite_shape(&bundled_suite())?;
    let m = &run.report.metrics;
    let top = |p: Profile, g: Group| {
        m.profile(p)
            .map(|pm| pm.group(g).mean_top(10))
            .unwrap_or(f64::NAN)
    };
    let (e, s, st) = (
        top(Profile::Ethical, Group::Vru),
        top(Profile::Selfish, Group::Vru),
        top(Profile::Standard, Group::Vru),
    );
    let (ego_e, ego_s) = (
        top(Profile::Ethical, Group::EgoAv),
        top(Profile::Selfish, Group::EgoAv),
    );
    ensure(e < s && (s - e) / s >= 0.05, || {
        format!("VRU ethical {e} vs selfish {s}")
    })?;
    ensure(e < st && (st - e) / st >= 0.05, || {
        format!("VRU ethical {e} vs standard {st}")
    })?;
    ensure(ego_s <= ego_e, || {
        format!("ego selfish {ego_s} > ethical {ego_e}")
    })?;
    ensure(run.elapsed < Duration::from_secs(600), || {
        format!("took {:?}", run.elapsed)
    })?;
    Ok(format!(
        "{n} scenarios ({vru} with VRUs); top-10 VRU ethical {e:.6} selfish {s:.6} standard {st:.6}; \
         top-10 ego selfish {ego_s:.6} <= ethical {ego_e:.6}; single-threaded {:?}",
        run.elapsed
    ))
}

fn third_party_harm(run: &SuiteRun) -> Outcome {
    let m = &run.report.metrics;
    let harm = |p: Profile| {
        m.profile(p)
            .map(|pm| pm.group(Group::ThirdParty).cumulated_harm)
            .unwrap_or(f64::NAN)
    };
    let (e, s, st) = (
        harm(Profile::Ethical),
        harm(Profile::Selfish),
        harm(Profile::Standard),
    );
    ensure(e <= s && e <= st, || {
        format!("ethical {e}, selfish {s}, standard {st}")
    })?;
    Ok(format!(
        "ethical {e:.6} <= selfish {s:.6}, standard {st:.6}"
    ))
}

fn files_under(root: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(a: &SuiteRun) -> Outcome {
    let b = run_suite(8)?;
    let (fa, fb) = (files_under(a.dir.path()), files_under(b.dir.path()));
    ensure(fa == fb, || "different file sets".into())?;
    for f in &fa {
        let (x, y) = (
            std::fs::read(a.dir.path().join(f)).unwrap(),
            std::fs::read(b.dir.path().join(f)).unwrap(),
        );
        ensure(x == y, || {
            format!("{} differs between --jobs 1 and 8", f.display())
        })?;
    }
    Ok(format!(
        "{} files byte-identical for jobs 1 and 8",
        fa.len()
    ))
}

fn state_gap(a: &EgoRecord, b: &EgoRecord) -> f64 {
    [
        a.x - b.x,
        a.y - b.y,
        wrap_angle(a.heading - b.heading),
        a.v - b.v,
        a.a - b.a,
        a.lat_acc - b.lat_acc,
        a.s - b.s,
        a.d - b.d,
    ]
    .iter()
    .fold(0.0, |m, v| m.max(v.abs()))
}

fn replan_integrity(run: &SuiteRun) -> Outcome {
    const TOL: f64 = 1e-6;
    let logs: Vec<SimulationLog> =
        evaluation::read_logs(&run.dir.path().join("logs")).map_err(|e| e.to_string())?;
    let suite = bundled_suite();
    let mut steps = 0;
    let mut worst_gap = 0.0f64;
    for log in &logs {
        let name = format!("{} [{}]", log.header.scenario, log.header.profile);
        let sc = suite
            .iter()
            .find(|s| s.id == log.header.scenario)
            .ok_or_else(|| format!("{name}: unknown scenario"))?;
        let lim = &sc.ego.limits;
        let first = log
            .steps
            .first()
            .ok_or_else(|| format!("{name}: empty log"))?;
        let s0 = &sc.ego.state;
        ensure(
            (first.ego.x - s0.x).abs() <= TOL
                && (first.ego.y - s0.y).abs() <= TOL
                && (first.ego.v - s0.v).abs() <= TOL,
            || format!("{name}: run does not start at the scenario state"),
        )?;
        for (k, st) in log.steps.iter().enumerate() {
            let e = &st.ego;
            ensure(
                e.v >= -TOL
                    && e.v <= lim.v_max + TOL
                    && e.a >= lim.a_min - TOL
                    && e.a <= lim.a_max + TOL
                    && e.lat_acc.abs() <= lim.lat_acc_max + TOL
                    && e.jerk.abs() <= lim.jerk_max + TOL,
                || format!("{name} step {k}: {e:?} violates {lim:?}"),
            )?;
            if let Some(next) = log.steps.get(k + 1) {
                let gap = state_gap(&st.next, &next.ego);
                worst_gap = worst_gap.max(gap);
                ensure(gap <= TOL, || format!("{name} step {k}: replan gap {gap}"))?;
            }
            steps += 1;
        }
    }
    Ok(format!(
        "{} runs, {steps} executed states within limits, largest replan gap {worst_gap:.1e}",
        logs.len()
    ))
}

// ----------------------------------------------------------------

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into())),
    }
}

fn main() {
    let mut failures = 0;
    let mut emit = |n: u8, title: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("criterion {n}: PASS  {title}: {detail}"),
        Err(detail) => {
            failures += 1;
            println!("criterion {n}: FAIL  {title}: {detail}");
        }
    };
    emit(1, "equation examples", guarded(equation_examples));
    emit(
        2,
        "collision probability vs monte carlo",
        guarded(probability_oracle),
    );
    emit(3, "property suite", guarded(property_suite));
    emit(4, "overtake cyclist manoeuvre", guarded(overtake_cyclist));

    let suite = catch_unwind(|| run_suite(1)).unwrap_or_else(|_| Err("batch panicked".into()));
    match &suite {
        Ok(run) => {
            emit(
                5,
                "VRU and ego risk trend",
                guarded(|| vru_and_ego_trend(run)),
            );
            emit(6, "third-party harm", guarded(|| third_party_harm(run)));
            emit(7, "batch determinism", guarded(|| determinism(run)));
            emit(
                8,
                "replanning loop integrity",
                guarded(|| replan_integrity(run)),
            );
        }
        Err(e) => {
            for (n, title) in [
                (5, "VRU and ego risk trend"),
                (6, "third-party harm"),
                (7, "batch determinism"),
                (8, "replanning loop integrity"),
            ] {
                emit(n, title, Err(format!("batch did not run: {e}")));
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
