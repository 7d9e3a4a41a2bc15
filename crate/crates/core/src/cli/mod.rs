//! Command-line experiment runner.
//!
//! ```text
//! coolsim run <config> --out <dir> [--jobs N] [--seed S]
//! coolsim list [--json]
//! ```
//!
//! Exit status 0 on success, 1 for usage or configuration errors, 2 when a
//! numerical step failed (tables keep the points that succeeded).

pub mod config;
pub mod output;
pub mod scenarios;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
use config::RunConfig;
use output::{Manifest, RunStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coolsim", version, about = "Randomized repeated-interaction cooling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario described by a TOML or JSON config (or a manifest).
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; 0 uses all cores.
        #[arg(long, env = "COOLSIM_JOBS")]
        jobs: Option<usize>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List the available scenarios.
    List {
        #[arg(long)]
        json: bool,
    },
}

/// Result of one `run` invocation.
#[derive(Debug)]
pub struct RunReport {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub exit_code: i32,
}

/// Parses `args` (including the program name) and executes the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::List { json } => {
            print!("{}", list_scenarios(json));
            EXIT_OK
        }
        Command::Run { config, out, jobs, seed } => match run_config_file(&config, &out, jobs.unwrap_or(0), seed) {
            Ok(report) => {
                for e in &report.manifest.errors {
                    eprintln!("coolsim: {e}");
                }
                report.exit_code
            }
            Err(e) => {
                eprintln!("coolsim: {e}");
                match e {
                    Error::Config(_) | Error::Io(_) => EXIT_CONFIG,
                    _ => EXIT_NUMERICAL,
                }
            }
        },
    }
}

/// The scenario registry, as text lines or a JSON array.
pub fn list_scenarios(as_json: bool) -> String {
    if as_json {
        let items: Vec<_> = scenarios::SCENARIOS
            .iter()
            .map(|(name, about)| json!({ "name": name, "description": about, "defaults": scenarios::defaults(name) }))
            .collect();
        let mut s = serde_json::to_string_pretty(&items).expect("registry serializes");
        s.push('\n');
        s
    } else {
        scenarios::SCENARIOS
            .iter()
            .map(|(name, about)| {
                let d = scenarios::defaults(name).expect("registered");
                format!("{name:<24} {about}; defaults {d}\n")
            })
            .collect()
    }
}

/// Loads `config_path` and runs it into `out`.
pub fn run_config_file(config_path: &Path, out: &Path, jobs: usize, seed: Option<u64>) -> Result<RunReport> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    run_config(&cfg, out, jobs)
}

/// Runs a parsed configuration: writes the manifest, the tables, then the
/// finalized manifest.
pub fn run_config(cfg: &RunConfig, out: &Path, jobs: usize) -> Result<RunReport> {
    if !scenarios::is_known(&cfg.scenario) {
        return Err(Error::Config(format!("unknown scenario {:?}; see `coolsim list`", cfg.scenario)));
    }
    std::fs::create_dir_all(out)
        .map_err(|e| Error::Config(format!("cannot create output directory {}: {e}", out.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let mut manifest = Manifest::start(&cfg.scenario, cfg.seed, cfg.params.clone(), pool.current_num_threads());
    let manifest_path = manifest.write(out)?;
    log::info!("running {} into {}", cfg.scenario, out.display());

    let outcome = pool.install(|| scenarios::run(cfg));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e @ Error::Config(_)) => {
            manifest.errors.push(e.to_string());
            manifest.finish(RunStatus::Failed);
            manifest.write(out)?;
            return Err(e);
        }
        Err(e) => {
            manifest.errors.push(e.to_string());
            manifest.finish(RunStatus::Failed);
            manifest.write(out)?;
            return Ok(RunReport { manifest, manifest_path, exit_code: EXIT_NUMERICAL });
        }
    };
    manifest.params = outcome.params;
    for table in &outcome.tables {
        manifest.outputs.push(output::write_table(out, table)?);
    }
    manifest.checks = outcome.checks;
    manifest.errors = outcome.errors;
    let failed = !manifest.errors.is_empty();
    manifest.finish(if failed { RunStatus::Failed } else { RunStatus::Ok });
    manifest.write(out)?;
    Ok(RunReport { manifest, manifest_path, exit_code: if failed { EXIT_NUMERICAL } else { EXIT_OK } })
}
