//! `cachecast` command-line front end.
//!
//! Every command reads a [`RunConfig`] (JSON file plus flag overrides),
//! echoes the effective configuration to `effective_config.json` in the output
//! directory and writes its artifacts next to it. Each artifact carries the
//! configuration hash and seed.

mod commands;
pub mod config;
pub mod error;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use cachecast::planner::Objective;
use cachecast::Receiver;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

pub use config::{Grid, RunConfig};
pub use error::{CliError, CliResult};
pub use output::Output;

#[derive(Debug, Parser)]
#[command(name = "cachecast", version, about = "Coded caching over MDS multipoint multicast: simulation, analysis and planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args, Default)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; 0 uses all cores. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Monte Carlo geometry draws.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Macro-diversity order.
    #[arg(long = "L", global = true)]
    pub l: Option<usize>,
    /// Receive antennas.
    #[arg(long, global = true)]
    pub nr: Option<usize>,
    /// Path-loss exponent.
    #[arg(long, global = true)]
    pub eta: Option<f64>,
    /// Edge-node density per km².
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Delivery rates `start:stop:points` in bit/s/Hz.
    #[arg(long, global = true)]
    pub rate_grid: Option<Grid>,
    /// SIR thresholds `start:stop:points` in dB.
    #[arg(long, global = true)]
    pub sir_grid: Option<Grid>,
    #[arg(long, global = true)]
    pub receiver: Option<ReceiverArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReceiverArg {
    Pzf,
    PzfSic,
}

impl From<ReceiverArg> for Receiver {
    fn from(r: ReceiverArg) -> Self {
        match r {
            ReceiverArg::Pzf => Receiver::Pzf,
            ReceiverArg::PzfSic => Receiver::PzfSic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    AverageRate,
    TargetOutage,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Monte Carlo SIR CDFs, outage curve and ergodic rates.
    Simulate,
    /// Analytic SIR CDFs, average rates, outage curve and L×rate products.
    Analyze,
    /// Choose the macro-diversity order L.
    Optimize(OptimizeArgs),
    /// Run the oracle suite; exits with 3 if any check fails.
    Validate,
    /// Coded-caching and MDS round trip on a toy library.
    DeliverDemo(DemoArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub objective: Option<ObjectiveArg>,
    /// Target outage probability for `target-outage`.
    #[arg(long)]
    pub target: Option<f64>,
    /// Monte Carlo draws to re-score the selected L.
    #[arg(long)]
    pub verify_trials: Option<u64>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct DemoArgs {
    #[arg(long)]
    pub users: Option<usize>,
    #[arg(long)]
    pub files: Option<usize>,
    /// Cache size M in files (integer or fraction).
    #[arg(long)]
    pub cache: Option<String>,
    #[arg(long)]
    pub edge_nodes: Option<usize>,
    #[arg(long)]
    pub file_bytes: Option<usize>,
    /// Comma-separated demand vector.
    #[arg(long, value_delimiter = ',')]
    pub demand: Option<Vec<usize>>,
}

/// Fully resolved experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config: RunConfig,
    pub out: PathBuf,
    pub workers: usize,
}

impl ExperimentSpec {
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let c = &cli.common;
        let mut config = match &c.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        // for deliver-demo, --L is the MDS data-block count rather than a radio parameter
        let is_demo = matches!(cli.command, Command::DeliverDemo(_));
        let s = &mut config.system;
        if let Some(v) = c.seed {
            s.seed = v;
        }
        if let Some(v) = c.l.filter(|_| !is_demo) {
            s.l = v;
        }
        if let Some(v) = c.nr {
            s.n_r = v;
        }
        if let Some(v) = c.eta {
            s.eta = v;
        }
        if let Some(v) = c.lambda {
            s.lambda_density = v;
        }
        if let Some(v) = c.trials {
            config.trials = v;
        }
        if let Some(v) = c.rate_grid {
            config.rate_grid = v;
        }
        if let Some(v) = c.sir_grid {
            config.sir_db_grid = v;
        }
        if let Some(v) = c.receiver {
            config.receiver = v.into();
        }
        match &cli.command {
            Command::Optimize(a) => {
                let target = a.target.or(match config.objective {
                    Objective::TargetOutage { target } => Some(target),
                    Objective::AverageRate => None,
                });
                match a.objective {
                    Some(ObjectiveArg::AverageRate) => config.objective = Objective::AverageRate,
                    Some(ObjectiveArg::TargetOutage) => {
                        config.objective = Objective::TargetOutage {
                            target: target.unwrap_or(0.1),
                        }
                    }
                    None => {
                        if let Some(t) = a.target {
                            config.objective = Objective::TargetOutage { target: t };
                        }
                    }
                }
                if let Some(v) = a.verify_trials {
                    config.verify_trials = v;
                }
            }
            Command::DeliverDemo(a) => {
                let d = &mut config.demo;
                if let Some(v) = a.users {
                    d.users = v;
                }
                if let Some(v) = a.files {
                    d.files = v;
                }
                if let Some(v) = &a.cache {
                    d.cache_files = v.clone();
                }
                if let Some(v) = a.edge_nodes {
                    d.edge_nodes = v;
                }
                if let Some(v) = c.l {
                    d.l = v;
                }
                if let Some(v) = a.file_bytes {
                    d.file_bytes = v;
                }
                if let Some(v) = &a.demand {
                    d.demand = Some(v.clone());
                }
            }
            _ => {}
        }
        if is_demo {
            config
                .demo
                .cache_files
                .parse::<Ratio<u64>>()
                .map_err(|e| CliError::Config(format!("cache size `{}`: {e}", config.demo.cache_files)))?;
        }
        config.validate()?;
        Ok(Self {
            command: cli.command,
            config,
            out: cli.common.out,
            workers: cli.common.workers,
        })
    }
}

/// Summary printed by `run`.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn run(spec: &ExperimentSpec) -> CliResult<RunOutcome> {
    let out = Output::create(&spec.out, &spec.config)?;
    let summary = match &spec.command {
        Command::Simulate => commands::simulate(spec, &out)?,
        Command::Analyze => commands::analyze(spec, &out)?,
        Command::Optimize(_) => commands::optimize(spec, &out)?,
        Command::Validate => commands::validate(spec, &out)?,
        Command::DeliverDemo(_) => commands::deliver_demo(spec, &out)?,
    };
    Ok(RunOutcome {
        files: out.written(),
        summary,
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = ExperimentSpec::from_cli(cli).and_then(|spec| {
        let outcome = run(&spec)?;
        println!("{}", outcome.summary);
        for f in &outcome.files {
            println!("wrote {}", f.display());
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
