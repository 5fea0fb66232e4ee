use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use riskethics::evaluation::{self, BatchOptions, Group, DEFAULT_TOP_K};
use riskethics::simulator::RunStatus;
use riskethics::{load_scenario, Error, PlannerConfig, Profile};

#[derive(Debug, Parser)]
#[command(
    name = "riskethics",
    version,
    about = "Risk-distributing trajectory planner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario and write its log.
    Plan {
        scenario: PathBuf,
        #[arg(long, default_value = "ethical", value_parser = parse_profile)]
        profile: Profile,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Simulate every matching scenario under each profile and aggregate.
    Batch {
        /// Glob pattern of scenario files.
        pattern: String,
        #[arg(long, value_delimiter = ',', value_parser = parse_profile,
              default_value = "ethical,selfish,standard")]
        profiles: Vec<Profile>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads (0: one per core).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        top_k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep the responsibility principle enabled (off by default in batches).
        #[arg(long)]
        responsibility: bool,
    },
    /// Recompute the metric files from a directory of logs.
    Report {
        logs: PathBuf,
        /// Output directory; defaults to the log directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_TOP_K)]
        top_k: usize,
    },
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<PlannerConfig, Error> {
    match path {
        Some(p) => PlannerConfig::load(p),
        None => Ok(PlannerConfig::default()),
    }
}

fn plan(
    scenario: &Path,
    profile: Profile,
    config: Option<&Path>,
    out: &Path,
    seed: u64,
) -> Result<u8, Error> {
    let scenario = load_scenario(scenario)?;
    let config = load_config(config)?.with_profile(profile);
    let log = riskethics::run(&scenario, &config, seed)?;
    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.to_path_buf(),
        source: e,
    })?;
    let path = out.join(evaluation::log_file_name(&log));
    std::fs::write(&path, log.to_jsonl()).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let max_third = log
        .steps
        .iter()
        .flat_map(|s| &s.risks)
        .map(|r| r.risk)
        .fold(0.0, f64::max);
    println!(
        "{} [{}]: {:?} after {} steps, {} collision(s), max third-party risk {:.6}, log {}",
        log.header.scenario,
        profile,
        log.summary.status,
        log.summary.steps,
        log.summary.collisions.len(),
        max_third,
        path.display()
    );
    if let Some(f) = &log.summary.fault {
        eprintln!("planner fault: {f}");
    }
    Ok(if log.summary.status == RunStatus::Fault {
        3
    } else {
        0
    })
}

#[allow(clippy::too_many_arguments)]
fn batch(
    pattern: &str,
    profiles: Vec<Profile>,
    config: Option<&Path>,
    out: &Path,
    jobs: usize,
    top_k: usize,
    seed: u64,
    responsibility: bool,
) -> Result<u8, Error> {
    let mut config = load_config(config)?;
    config.responsibility.enabled &= responsibility;
    let options = BatchOptions {
        profiles,
        jobs,
        top_k,
        seed,
    };
    let report = evaluation::batch(pattern, &config, out, &options)?;
    for p in &report.metrics.profiles {
        println!(
            "{:<9} runs {:>3}  collisions {:>3}  faults {:>2}  top-10 VRU {:.6}  top-10 ego {:.6}  3rd-party harm {:.6}",
            p.profile.as_str(),
            p.runs,
            p.collisions,
            p.faults,
            p.group(Group::Vru).mean_top(10),
            p.group(Group::EgoAv).mean_top(10),
            p.group(Group::ThirdParty).cumulated_harm,
        );
    }
    for f in &report.failures {
        eprintln!("failed: {} ({})", f.source, f.message);
    }
    println!("reports written to {}", out.display());
    Ok(if report.has_faults() { 3 } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match cli.command {
        Command::Plan {
            scenario,
            profile,
            config,
            out,
            seed,
        } => plan(&scenario, profile, config.as_deref(), &out, seed),
        Command::Batch {
            pattern,
            profiles,
            config,
            out,
            jobs,
            top_k,
            seed,
            responsibility,
        } => batch(
            &pattern,
            profiles,
            config.as_deref(),
            &out,
            jobs,
            top_k,
            seed,
            responsibility,
        ),
        Command::Report { logs, out, top_k } => {
            let out = out.unwrap_or_else(|| logs.clone());
            evaluation::report(&logs, &out, top_k).map(|m| {
                println!(
                    "recomputed metrics for {} runs into {}",
                    m.runs.len(),
                    out.display()
                );
                0
            })
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
