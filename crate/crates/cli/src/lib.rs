//! Command-line front end for `pfl-core`: run configurations, scenario
//! dispatch and artifact output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod scenario;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

use config::{parse_config, parse_config_for, ConfigError, RunConfig, Scenario};
use output::Artifacts;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: pfl_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl RunError {
    pub fn core(context: impl Into<String>, source: pfl_core::Error) -> Self {
        RunError::Core { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) => EXIT_CONFIG,
            RunError::Core { .. } | RunError::Io { .. } => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pfl",
    version,
    about = "Paraxial fluid of light and gradient echo memory simulations",
    after_help = "COMMAND is `validate`, `version`, or a scenario: propagate, dispersion, sound-scaling, \
                  precondensation, structure-factor, vortices, gem, gem-efficiency-sweep, fifo-filo"
)]
pub struct Cli {
    /// Scenario to run, `validate` or `version`.
    pub command: String,
    /// Run configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for independent runs (ensemble members, sweep points).
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Output directory; overrides `run.output` and `$PFL_OUT`.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed overriding `run.seed`.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
}

/// `--out`, then `run.output`, then `$PFL_OUT/<scenario>`, then `pfl-out/<scenario>`.
pub fn output_dir(cli_out: Option<&Path>, cfg: &RunConfig, env_root: Option<&Path>) -> PathBuf {
    if let Some(p) = cli_out {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output {
        return PathBuf::from(p);
    }
    env_root.unwrap_or(Path::new("pfl-out")).join(cfg.scenario.name())
}

fn read_config(path: Option<&Path>) -> Result<String, RunError> {
    let path = path.ok_or_else(|| RunError::Usage("--config FILE is required".into()))?;
    std::fs::read_to_string(path).map_err(|e| RunError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Runs a validated configuration into `out`, returning the summary lines.
pub fn execute(cfg: &RunConfig, out: &Path, jobs: Option<usize>) -> Result<Vec<String>, RunError> {
    let mut artifacts = Artifacts::create(out, cfg.emit)?;
    artifacts.text("config.ini", &cfg.to_text())?;
    let run = |a: &mut Artifacts| scenario::run_scenario(cfg, a);
    let summary = match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| RunError::Usage(format!("--jobs: {e}")))?;
            pool.install(|| run(&mut artifacts))?
        }
        None => run(&mut artifacts)?,
    };
    let mut text = summary.join("\n");
    text.push('\n');
    artifacts.text("summary.txt", &text)?;
    artifacts.finish()?;
    Ok(summary)
}

fn dispatch(cli: &Cli) -> Result<(), RunError> {
    match cli.command.as_str() {
        "version" => {
            println!("pfl {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
        "validate" => {
            let text = read_config(cli.config.as_deref())?;
            let cfg = parse_config(&text)?;
            println!("ok: {} configuration is valid", cfg.scenario);
            Ok(())
        }
        name => {
            let scenario: Scenario = name.parse().map_err(|_| {
                RunError::Usage(format!("unknown scenario `{name}`; valid scenarios: {}", Scenario::valid_names()))
            })?;
            let text = read_config(cli.config.as_deref())?;
            let mut cfg = parse_config_for(&text, Some(scenario))?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let env_root = std::env::var_os("PFL_OUT").map(PathBuf::from);
            let out = output_dir(cli.out.as_deref(), &cfg, env_root.as_deref());
            log::info!("running {} into {}", cfg.scenario, out.display());
            for line in execute(&cfg, &out, cli.jobs)? {
                println!("{line}");
            }
            println!("manifest: {}", out.join(output::MANIFEST).display());
            Ok(())
        }
    }
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
