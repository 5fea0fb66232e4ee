//! Batch runs across planner profiles and the aggregated reports.
//!
//! A batch writes into its output directory:
//! - `logs/<scenario>__<profile>.jsonl`: one simulation log per run
//! - `metrics.csv`: one row per run
//! - `metrics.json`: per-profile group metrics plus the rows
//! - `top_risks_<profile>.csv`: the largest risks per group, descending
//! - `harm_totals.csv`: cumulated realized harm per profile and group
//! - `failures.csv`: scenarios that could not be loaded or run

mod metrics;

pub use metrics::{
    cumulated_harm, group_risks, top_k_risks, Group, GroupMetrics, ProfileMetrics, RunRow,
};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PlannerConfig;
use crate::error::{Error, Result};
use crate::ethics::Profile;
use crate::scenario::{load_scenario, Scenario};
use crate::simulator::{run, RunStatus, SimulationLog};

pub const DEFAULT_TOP_K: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct BatchOptions {
    pub profiles: Vec<Profile>,
    /// Worker threads; 0 picks one per core.
    pub jobs: usize,
    pub top_k: usize,
    pub seed: u64,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            profiles: Profile::ALL.to_vec(),
            jobs: 0,
            top_k: DEFAULT_TOP_K,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub source: String,
    pub profile: Option<Profile>,
    pub message: String,
}

/// Aggregated results; a pure function of the logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub top_k: usize,
    pub profiles: Vec<ProfileMetrics>,
    pub runs: Vec<RunRow>,
}

impl Metrics {
    /// Logs are ordered by (scenario, profile) before aggregation.
    pub fn compute(logs: &[SimulationLog], profiles: &[Profile], top_k: usize) -> Self {
        let mut sorted: Vec<&SimulationLog> = logs.iter().collect();
        sorted.sort_by(|a, b| {
            (&a.header.scenario, a.header.profile).cmp(&(&b.header.scenario, b.header.profile))
        });
        let mut profiles = profiles.to_vec();
        profiles.sort();
        profiles.dedup();
        Self {
            top_k,
            profiles: profiles
                .iter()
                .map(|&p| {
                    let of: Vec<SimulationLog> = sorted
                        .iter()
                        .filter(|l| l.header.profile == p)
                        .map(|l| (*l).clone())
                        .collect();
                    ProfileMetrics::compute(p, &of, top_k)
                })
                .collect(),
            runs: sorted.iter().map(|l| RunRow::from_log(l)).collect(),
        }
    }

    pub fn profile(&self, profile: Profile) -> Option<&ProfileMetrics> {
        self.profiles.iter().find(|p| p.profile == profile)
    }

    pub fn faults(&self) -> usize {
        self.profiles.iter().map(|p| p.faults).sum()
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = String::from(RunRow::CSV_HEADER);
        out.push('\n');
        for r in &self.runs {
            out.push_str(&r.csv_line());
            out.push('\n');
        }
        out
    }

    pub fn top_risks_csv(&self, profile: Profile) -> Option<String> {
        let p = self.profile(profile)?;
        let mut out = String::from("group,rank,risk\n");
        for g in &p.groups {
            for (i, r) in g.top_k.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", g.group, i + 1, r));
            }
        }
        Some(out)
    }

    pub fn harm_totals_csv(&self) -> String {
        let mut out = String::from("profile,group,cumulated_harm,collisions\n");
        for p in &self.profiles {
            for g in &p.groups {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    p.profile, g.group, g.cumulated_harm, g.collision_count
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize") + "\n"
    }

    /// Writes the metric files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join("metrics.csv"), &self.metrics_csv())?;
        write_file(&dir.join("metrics.json"), &self.to_json())?;
        write_file(&dir.join("harm_totals.csv"), &self.harm_totals_csv())?;
        for p in &self.profiles {
            let csv = self.top_risks_csv(p.profile).unwrap_or_default();
            write_file(&dir.join(format!("top_risks_{}.csv", p.profile)), &csv)?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub metrics: Metrics,
    pub logs: Vec<SimulationLog>,
    pub failures: Vec<RunFailure>,
}

impl BatchReport {
    /// Planner faults make a batch unsuccessful; load failures do not.
    pub fn has_faults(&self) -> bool {
        self.metrics.faults() > 0
            || self
                .logs
                .iter()
                .any(|l| l.summary.status == RunStatus::Fault)
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))
}

/// Runs every scenario under every profile and aggregates in memory.
pub fn run_batch(
    scenarios: &[Scenario],
    config: &PlannerConfig,
    options: &BatchOptions,
) -> Result<BatchReport> {
    config.validate()?;
    if options.top_k == 0 {
        return Err(Error::config("top_k", "must be >= 1"));
    }
    let mut order: Vec<&Scenario> = scenarios.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut profiles = options.profiles.clone();
    profiles.sort();
    profiles.dedup();
    let tasks: Vec<(&Scenario, Profile)> = order
        .iter()
        .flat_map(|s| profiles.iter().map(move |&p| (*s, p)))
        .collect();
    let results: Vec<std::result::Result<SimulationLog, RunFailure>> =
        pool(options.jobs)?.install(|| {
            tasks
                .par_iter()
                .map(|(s, p)| {
                    run(s, &config.with_profile(*p), options.seed).map_err(|e| RunFailure {
                        source: s.id.clone(),
                        profile: Some(*p),
                        message: e.to_string(),
                    })
                })
                .collect()
        });
    let mut logs = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(l) => logs.push(l),
            Err(f) => failures.push(f),
        }
    }
    Ok(BatchReport {
        metrics: Metrics::compute(&logs, &profiles, options.top_k),
        logs,
        failures,
    })
}

/// Scenario files matching `pattern`, sorted by path.
pub fn scenario_paths(pattern: &str) -> Result<Vec<PathBuf>> {
    let paths = glob::glob(pattern).map_err(|e| Error::config("glob", e.to_string()))?;
    let mut out: Vec<PathBuf> = paths.filter_map(|p| p.ok()).collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::Input(format!("no scenario matches `{pattern}`")));
    }
    Ok(out)
}

pub fn log_file_name(log: &SimulationLog) -> String {
    format!("{}__{}.jsonl", log.header.scenario, log.header.profile)
}

/// Loads every scenario matching `pattern`, runs the batch and writes the
/// logs and reports into `out`.
pub fn batch(
    pattern: &str,
    config: &PlannerConfig,
    out: &Path,
    options: &BatchOptions,
) -> Result<BatchReport> {
    let mut scenarios: Vec<Scenario> = Vec::new();
    let mut failures = Vec::new();
    for path in scenario_paths(pattern)? {
        match load_scenario(&path) {
            Ok(s) if scenarios.iter().any(|o| o.id == s.id) => failures.push(RunFailure {
                source: path.display().to_string(),
                profile: None,
                message: format!("duplicate scenario id `{}`", s.id),
            }),
            Ok(s) => scenarios.push(s),
            Err(e) => failures.push(RunFailure {
                source: path.display().to_string(),
                profile: None,
                message: e.to_string(),
            }),
        }
    }
    let mut report = run_batch(&scenarios, config, options)?;
    failures.append(&mut report.failures);
    report.failures = failures;

    let logs_dir = out.join("logs");
    std::fs::create_dir_all(&logs_dir).map_err(|e| Error::io(&logs_dir, e))?;
    for log in &report.logs {
        write_file(&logs_dir.join(log_file_name(log)), &log.to_jsonl())?;
    }
    report.metrics.write(out)?;
    let mut csv = String::from("source,profile,message\n");
    for f in &report.failures {
        csv.push_str(&format!(
            "{},{},{}\n",
            f.source,
            f.profile.map_or(String::new(), |p| p.to_string()),
            f.message.replace([',', '\n'], ";")
        ));
    }
    write_file(&out.join("failures.csv"), &csv)?;
    Ok(report)
}

/// Reads every `*.jsonl` log in `dir`, sorted by file name.
pub fn read_logs(dir: &Path) -> Result<Vec<SimulationLog>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            SimulationLog::from_jsonl(&text)
        })
        .collect()
}

/// Recomputes the metrics of a directory of logs and writes them to `out`.
pub fn report(logs_dir: &Path, out: &Path, top_k: usize) -> Result<Metrics> {
    if top_k == 0 {
        return Err(Error::config("top_k", "must be >= 1"));
    }
    let logs = read_logs(logs_dir)?;
    let mut profiles: Vec<Profile> = logs.iter().map(|l| l.header.profile).collect();
    profiles.sort();
    profiles.dedup();
    let metrics = Metrics::compute(&logs, &profiles, top_k);
    metrics.write(out)?;
    Ok(metrics)
}
