#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;

use riskethics::{load_scenario, PlannerConfig, Scenario};

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn scenario_glob() -> String {
    format!("{}/*.json", scenario_dir().display())
}

pub fn bundled(name: &str) -> Scenario {
    load_scenario(scenario_dir().join(format!("{name}.json"))).expect("bundled scenario loads")
}

pub fn bundled_suite() -> Vec<Scenario> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load_scenario(p).unwrap()).collect()
}

/// Settings of `riskethics batch` without `--responsibility`.
pub fn batch_config() -> PlannerConfig {
    let mut cfg = PlannerConfig::default();
    cfg.responsibility.enabled = false;
    cfg
}

pub fn rel_close(actual: f64, expected: f64, tol: f64) -> bool {
    let scale = expected.abs().max(f64::MIN_POSITIVE);
    actual == expected || ((actual - expected) / scale).abs() <= tol
}

/// A straight road along x with the given lanes, ego at the origin.
pub fn straight_road(id: &str, lanes: u32, lane_width: f64, agents: &str) -> Scenario {
    Scenario::from_json(&format!(
        r#"{{
          "id": "{id}",
          "reference_line": [[-20, 0], [400, 0]],
          "lane_width": {lane_width},
          "lane_count": {lanes},
          "speed_limit": 14,
          "dt": 0.2,
          "horizon_T": 3,
          "duration": 6,
          "ego": {{
            "state": {{"x": 0, "y": 0, "heading": 0, "v": 10}},
            "limits": {{"v_max": 20, "a_min": -8, "a_max": 3, "lat_acc_max": 5, "jerk_max": 20}},
            "dimensions": {{"length": 4.5, "width": 1.8}},
            "target_velocity": 12
          }},
          "agents": [{agents}]
        }}"#
    ))
    .expect("fixture scenario is valid")
}
