//! `qpolar`: construct quantum polar codes, compute erasure-channel bounds,
//! simulate block error rates and search threshold rates.

mod config;
mod plot;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::{ConfigError, OutputFormat, PartialConfig};
use run::Outputs;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reliability profiles and quantum code partitions
    Construct(Common),
    /// Block error bounds for the erasure channel
    Bounds(Common),
    /// Monte Carlo block error estimates
    Simulate(Common),
    /// Highest quantum rate meeting a block error target
    Threshold(Common),
    /// Draw SVG figures from the CSV outputs of a configuration
    Plot(Common),
}

#[derive(Args)]
struct Common {
    /// TOML (or .json) experiment file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in configuration: smoke, minimal, fig1 ... fig6
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Trials per branch
    #[arg(long, value_name = "M")]
    trials: Option<u64>,
    /// Worker threads; 0 picks one per core
    #[arg(long, value_name = "K", env = "QPOLAR_WORKERS")]
    workers: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma separated: csv, svg
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    format: Option<Vec<OutputFormat>>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    dry_run: bool,
}

impl Common {
    fn layered(&self) -> Result<PartialConfig, ConfigError> {
        let mut layered = PartialConfig::default();
        if let Some(name) = &self.preset {
            layered.overlay(config::preset(name)?);
        }
        if let Some(path) = &self.config {
            layered.overlay(PartialConfig::from_path(path)?);
        }
        layered.overlay(PartialConfig {
            seed: self.seed,
            trials: self.trials,
            out: self.out.clone(),
            formats: self.format.clone(),
            ..Default::default()
        });
        Ok(layered)
    }
}

fn execute(cli: Cli) -> Result<()> {
    let (common, command) = match &cli.command {
        Command::Construct(c) => (c, Some(config::CommandKind::Construct)),
        Command::Bounds(c) => (c, Some(config::CommandKind::Bounds)),
        Command::Simulate(c) => (c, Some(config::CommandKind::Simulate)),
        Command::Threshold(c) => (c, Some(config::CommandKind::Threshold)),
        Command::Plot(c) => (c, None),
    };
    let mut layered = common.layered()?;
    if command.is_some() {
        layered.command = command;
    }
    let config = layered.resolve()?;
    if common.dry_run {
        println!("{}", config.canonical());
        return Ok(());
    }
    let mut outputs = Outputs::new(&config.out)?;
    with_workers(common.workers, || -> Result<()> {
        match command {
            Some(_) => {
                run::run(&config, &mut outputs)?;
                if config.wants(OutputFormat::Svg) {
                    plot::plot(&config, &mut outputs)?;
                }
            }
            None => plot::plot(&config, &mut outputs)?,
        }
        Ok(())
    })??;
    let label = command.map_or("plot", |c| c.as_str());
    let manifest = run::write_manifest(&config, &outputs, label)?;
    for f in outputs.files() {
        println!("{}", outputs.dir().join(&f.path).display());
    }
    println!("{}", manifest.display());
    Ok(())
}

#[cfg(feature = "parallel")]
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build()?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(_workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    Ok(f())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some()
        || matches!(err.downcast_ref::<qpolar::Error>(), Some(qpolar::Error::UnsupportedChannel(_)))
    {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
