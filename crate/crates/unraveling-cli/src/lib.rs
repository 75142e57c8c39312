//! Batch front-end for the unraveling laboratory.
//!
//! A run reads an [`ExperimentConfig`](config::ExperimentConfig) from JSON,
//! applies command-line overrides, executes one task against the library and
//! writes a CSV or JSON artifact headed by its provenance.

pub mod config;
pub mod error;
pub mod output;
pub mod source;
pub mod tasks;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;
use unraveling_lab::rotational::DEFAULT_PRECISION_BITS;

use config::{ExperimentConfig, Format, Task};
use error::CliError;
use output::{render, sha256_hex, Provenance};
use source::Source;
use tasks::{run_task, Context};

/// Overrides the big-float precision of the rotational probes.
pub const PRECISION_ENV: &str = "UNRAVELING_LAB_PRECISION_BITS";

#[derive(Debug, Parser)]
#[command(name = "unraveling-lab", version, about = "Entropic fluctuations of repeated quantum measurements")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Artifact path; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Size of the worker pool.
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Maximum number of enumeration nodes.
    #[arg(long, global = true, value_name = "NODES")]
    pub budget: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Alphabet, involution, labels and one-step law of the source.
    Info,
    /// Supported words of length T with log ℙ, log ℙ̂ and σ.
    Enumerate,
    /// Entropic pressure against its closed form.
    Pressure,
    /// Rate function by Legendre transform, with Gallavotti–Cohen residuals.
    Rate,
    /// Mean entropy production by every available method.
    Ep,
    /// Stein, Chernoff and Hoeffding exponents.
    Exponents,
    /// Monte Carlo test of the Keep–Switch central limit law.
    Clt,
    /// Weak-Gibbs decoupling diagnostic.
    GibbsDiag,
    /// Keep–Switch fluctuation–dissipation quantities.
    Fdr,
    /// Convert between PMP, HM and FM descriptions.
    Convert {
        #[arg(long, value_name = "pmp|hm|fm")]
        to: Option<String>,
    },
    /// Continued-fraction constructions and probes of the rotational instrument.
    Rotational {
        /// construct-delta, probe, derivative, u-increments or scan.
        action: Option<String>,
        /// Growth function Γ: T2 or EXP_T2.
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long, value_name = "LO,HI", value_parser = parse_interval)]
        interval: Option<[f64; 2]>,
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Run the task named in the configuration.
    Run,
}

fn parse_interval(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [lo, hi] => Ok([
            lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?,
            hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?,
        ]),
        _ => Err("expected LO,HI".into()),
    }
}

impl Command {
    fn task(&self) -> Option<Task> {
        Some(match self {
            Command::Info => Task::Info,
            Command::Enumerate => Task::Enumerate,
            Command::Pressure => Task::Pressure,
            Command::Rate => Task::Rate,
            Command::Ep => Task::Ep,
            Command::Exponents => Task::Exponents,
            Command::Clt => Task::Clt,
            Command::GibbsDiag => Task::GibbsDiag,
            Command::Fdr => Task::Fdr,
            Command::Convert { .. } => Task::Convert,
            Command::Rotational { .. } => Task::Rotational,
            Command::Run => return None,
        })
    }
}

/// Loads the configuration and folds the command line into it.
pub fn resolve(cli: &Cli) -> Result<(Task, ExperimentConfig), CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    let task = match (cli.command.task(), cfg.task) {
        (Some(t), Some(c)) if t != c => {
            return Err(CliError::schema(format!("configuration names task {} but {} was requested", c.name(), t.name())))
        }
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => return Err(CliError::schema("no task given on the command line or in the configuration")),
    };
    cfg.task = Some(task);
    let c = &cli.common;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(b) = c.budget {
        cfg.budget = b;
    }
    if c.workers.is_some() {
        cfg.workers = c.workers;
    }
    if c.out.is_some() {
        cfg.output.path = c.out.clone();
    }
    if c.format.is_some() {
        cfg.output.format = c.format;
    }
    match &cli.command {
        Command::Convert { to: Some(to) } => cfg.params.to = Some(to.clone()),
        Command::Rotational { action, gamma, interval, t_max } => {
            if action.is_some() {
                cfg.params.action = action.clone();
            }
            if gamma.is_some() {
                cfg.params.growth = gamma.clone();
            }
            if interval.is_some() {
                cfg.params.interval = *interval;
            }
            if t_max.is_some() {
                cfg.params.t_max = *t_max;
            }
        }
        _ => {}
    }
    cfg.validate()?;
    Ok((task, cfg))
}

fn precision_bits() -> Result<u32, CliError> {
    match std::env::var(PRECISION_ENV) {
        Err(_) => Ok(DEFAULT_PRECISION_BITS),
        Ok(v) => match v.trim().parse::<u32>() {
            Ok(b) if (16..=4096).contains(&b) => Ok(b),
            _ => Err(CliError::schema(format!("{PRECISION_ENV} must be an integer in [16, 4096], got {v:?}"))),
        },
    }
}

fn default_format(task: Task, cfg: &ExperimentConfig) -> Format {
    let documents = match task {
        Task::Convert => true,
        Task::Rotational => cfg.params.action.as_deref().unwrap_or("construct-delta") == "construct-delta",
        _ => false,
    };
    if documents {
        Format::Json
    } else {
        Format::Csv
    }
}

/// Executes a resolved configuration and returns the rendered artifact.
pub fn execute(task: Task, cfg: &ExperimentConfig) -> Result<String, CliError> {
    let ctx = Context { budget: cfg.budget, seed: cfg.seed, precision_bits: precision_bits()? };
    let source = Source::load(cfg)?;
    if let Some(src) = &source {
        src.log_assumptions(cfg.params.assumption_t.unwrap_or(4), cfg.budget)?;
    }
    let job = || run_task(task, &cfg.params, source.as_ref(), ctx);
    let report = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Compute(format!("worker pool: {e}")))?
            .install(job)?,
        None => job()?,
    };
    let prov = Provenance {
        tool: format!("unraveling-lab {}", env!("CARGO_PKG_VERSION")),
        library_version: unraveling_lab::VERSION.to_string(),
        config_sha256: sha256_hex(cfg.canonical_json().as_bytes()),
        task: task.name().to_string(),
        seed: cfg.seed,
        budget: cfg.budget,
    };
    let format = cfg.output.format.unwrap_or_else(|| default_format(task, cfg));
    Ok(render(&prov, &report, format))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (task, cfg) = resolve(cli)?;
    info!("task {} (seed {}, budget {})", task.name(), cfg.seed, cfg.budget);
    let text = execute(task, &cfg)?;
    match &cfg.output.path {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}
