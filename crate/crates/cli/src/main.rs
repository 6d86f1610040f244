//! `pluripot <solve-ma|ke|balanced|capacity|logenergy|report> --config <path> --out <dir> [--seed N]`
//!
//! Exit codes: 0 success, 1 config or input error, 2 non-convergence or a
//! failed report verdict.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use pluripot::{ModelSpec, ToricModel};

use crate::config::parse;
use crate::output::{config_hash, Header, Output, VERSION};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
}

impl From<pluripot::Error> for Failure {
    fn from(e: pluripot::Error) -> Self {
        match e {
            pluripot::Error::NoConvergence { .. } => Failure::Numerical(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "pluripot", version, about = "Batch runs of the pluripot solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve MA(psi) = mu.
    SolveMa(RunArgs),
    /// Kähler-Einstein potential of the anticanonical model.
    Ke(RunArgs),
    /// Balanced metrics over a list of k.
    Balanced(RunArgs),
    /// Electrostatic, Alexander-Taylor and Monge-Ampère capacities.
    Capacity(RunArgs),
    /// Logarithmic energy of a radial measure.
    Logenergy(RunArgs),
    /// Inequality suites on random pairs; one verdict file.
    Report(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn threads() -> Result<usize, Failure> {
    match std::env::var("PLURIPOT_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Failure::Config(format!("PLURIPOT_THREADS must be a positive integer, got `{v}`"))),
        },
    }
}

fn build(spec: &ModelSpec) -> Result<ToricModel, Failure> {
    Ok(spec.build()?)
}

fn start<T: Serialize>(name: &str, cfg: &T, args: &RunArgs, grid: String) -> Result<Output, Failure> {
    let header = Header {
        tool: "pluripot-cli",
        version: VERSION,
        command: name.to_string(),
        config_sha256: config_hash(cfg),
        seed: args.seed,
        grid,
    };
    Output::create(&args.out, header)
}

fn run(command: Command) -> Result<(), Failure> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads()?).build_global();
    pool.map_err(|e| Failure::Config(e.to_string()))?;
    let read = |args: &RunArgs| {
        std::fs::read_to_string(&args.config).map_err(|e| Failure::Config(format!("{}: {e}", args.config.display())))
    };
    match command {
        Command::SolveMa(args) => {
            let cfg: config::SolveMaConfig = parse(&read(&args)?)?;
            cfg.solver.validate()?;
            let model = build(&cfg.model)?;
            let out = start("solve-ma", &cfg, &args, model.descriptor())?;
            commands::solve_ma_cmd(&cfg, &model, &out)
        }
        Command::Ke(args) => {
            let cfg: config::KeConfig = parse(&read(&args)?)?;
            cfg.solver.validate()?;
            let model = build(&cfg.model)?;
            let out = start("ke", &cfg, &args, model.descriptor())?;
            commands::ke_cmd(&cfg, &model, &out, args.seed)
        }
        Command::Balanced(args) => {
            let cfg: config::BalancedConfig = parse(&read(&args)?)?;
            cfg.validate()?;
            let model = build(&cfg.model)?;
            let out = start("balanced", &cfg, &args, model.descriptor())?;
            commands::balanced_cmd(&cfg, &model, &out)
        }
        Command::Capacity(args) => {
            let cfg: config::CapacityConfig = parse(&read(&args)?)?;
            cfg.validate()?;
            let spec = cfg.model.clone().with_anchors(&commands::capacity_anchors(&cfg));
            let model = build(&spec)?;
            let out = start("capacity", &cfg, &args, model.descriptor())?;
            commands::capacity_cmd(&cfg, &model, &out)
        }
        Command::Logenergy(args) => {
            let cfg: config::LogEnergyConfig = parse(&read(&args)?)?;
            let model = build(&cfg.model)?;
            let out = start("logenergy", &cfg, &args, model.descriptor())?;
            commands::logenergy_cmd(&cfg, &model, &out)
        }
        Command::Report(args) => {
            let cfg: config::ReportConfig = parse(&read(&args)?)?;
            cfg.validate()?;
            let models = cfg.models.iter().map(build).collect::<Result<Vec<_>, _>>()?;
            let grid = models.iter().map(ToricModel::descriptor).collect::<Vec<_>>().join("; ");
            let out = start("report", &cfg, &args, grid)?;
            if commands::report_cmd(&cfg, &models, &out, args.seed)? {
                Ok(())
            } else {
                Err(Failure::Numerical("report: some inequality suite failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("pluripot: {}", msg.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("pluripot: {}", msg.replace('\n', " "));
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("pluripot: {}", msg.replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
