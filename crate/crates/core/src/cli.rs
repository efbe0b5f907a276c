//! Command-line front end: `run`, `sweep` and `reproduce`.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{parse_config, ConfigError, SimConfig};
use crate::engine::{run, SimError};
use crate::experiment::{reproduce, run_sweep, FigureId, SweepError, SweepSpec};
use crate::output::{emit_csv, run_table, OutputError};
use crate::policy::Strategy;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {}: {source}", path.display())]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Config { path: PathBuf, source: ConfigError },
    #[error("--set {assignment}: {source}")]
    Override {
        assignment: String,
        source: ConfigError,
    },
    #[error("seed {seed}: {source}")]
    Run { seed: u64, source: SimError },
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "dronecell",
    version,
    about = "Drone small-cell repositioning simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Configuration file (`key = value` lines); defaults apply to absent keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set speed=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output CSV path; `-` writes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed; replication i uses seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of replications.
    #[arg(long)]
    pub runs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the configured policy; one CSV row per replication.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Vary one configuration key and compare each strategy with its fixed baseline.
    Sweep {
        /// Configuration key to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Comma-separated strategies (ebd, nuf, lbf).
        #[arg(long, value_delimiter = ',', default_value = "ebd,nuf,lbf")]
        policies: Vec<Strategy>,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate the data behind one figure.
    Reproduce {
        /// fig2, fig3, fig4, fig5a, fig5b, fig5c, fig6 or fig7.
        figure: FigureId,
        #[command(flatten)]
        common: Common,
    },
}

/// Load the config file (if any), then apply `--set` and `--seed`.
pub fn load_config(common: &Common) -> Result<SimConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
                path: path.clone(),
                source,
            })?;
            parse_config(&text).map_err(|source| CliError::Config {
                path: path.clone(),
                source,
            })?
        }
        None => SimConfig::default(),
    };
    for assignment in &common.overrides {
        cfg.apply_override(assignment)
            .map_err(|source| CliError::Override {
                assignment: assignment.clone(),
                source,
            })?;
    }
    cfg.validate().map_err(|source| CliError::Override {
        assignment: common.overrides.join(" "),
        source,
    })?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = common.runs {
        if runs == 0 {
            return Err(CliError::Usage("--runs must be at least 1".into()));
        }
        cfg.replications = runs;
    }
    Ok(cfg)
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { common } => {
            let cfg = load_config(&common)?;
            // A plain run is a single replication unless asked otherwise.
            let reps = common.runs.unwrap_or(1) as u64;
            let runs = (0..reps)
                .into_par_iter()
                .map(|i| {
                    let seed = cfg.seed.wrapping_add(i);
                    let c = SimConfig {
                        seed,
                        ..cfg.clone()
                    };
                    run(&c)
                        .map(|m| (seed, m))
                        .map_err(|source| CliError::Run { seed, source })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let out = common.out.unwrap_or_else(|| PathBuf::from("-"));
            emit_csv(&run_table(&cfg, &runs), &out)?;
        }
        Command::Sweep {
            param,
            values,
            policies,
            common,
        } => {
            let cfg = load_config(&common)?;
            let spec = SweepSpec::new(&param, &values, cfg).with_policies(&policies);
            let result = run_sweep(&spec)?;
            let out = common.out.unwrap_or_else(|| PathBuf::from("-"));
            emit_csv(&result.to_table(), &out)?;
        }
        Command::Reproduce { figure, common } => {
            let cfg = load_config(&common)?;
            let table = reproduce(figure, &cfg, cfg.replications)?;
            let out = common
                .out
                .unwrap_or_else(|| PathBuf::from(format!("{figure}.csv")));
            emit_csv(&table, &out)?;
        }
    }
    Ok(())
}
