//! `oudisc`: estimate long-horizon real discount rates from historical
//! interest-rate and inflation series.
//!
//! Exit codes: 0 success, 1 usage or configuration, 2 ingest, 3 estimation,
//! 4 reporting.

mod config;
mod curve;
mod error;
mod estimate;
mod manifest;
mod output;
mod prepare;
mod simulate;
mod svg;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};
use crate::manifest::{Manifest, RunConfig, RunRecord, MANIFEST_FILE};
use crate::output::OutDir;

pub const OUT_DIR_ENV: &str = "OUDISC_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "oudisc-out";

#[derive(Debug, Parser)]
#[command(
    name = "oudisc",
    version,
    about = "Long-run real discount rates from a mean-reverting rate model"
)]
struct Cli {
    /// Flat `key = value` file supplying defaults for any long option
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output directory [env: OUDISC_OUT_DIR] [default: oudisc-out]
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Outputs do not depend on it [default: 0]
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build annual real-rate series from nominal yields and CPI
    Prepare(prepare::PrepareArgs),
    /// Fit the model and write report.json
    Estimate(estimate::EstimateArgs),
    /// Discount-rate curve with quantile bands (CSV and SVG)
    Curve(curve::CurveArgs),
    /// Negative-rate, inversion and correlation statistics of simulated series
    Simulate(simulate::SimulateArgs),
    /// Repeat the run recorded in a manifest
    Rerun {
        #[arg(value_name = "MANIFEST")]
        manifest: PathBuf,
    },
}

fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ConfigFile) -> CliResult<PathBuf> {
    if let Some(p) = flag {
        return Ok(p);
    }
    if let Some(p) = cfg.get::<PathBuf>("out_dir")? {
        return Ok(p);
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(p) if !p.is_empty() => Ok(PathBuf::from(p)),
        _ => Ok(PathBuf::from(DEFAULT_OUT_DIR)),
    }
}

fn execute(run: &RunConfig, out: &mut OutDir) -> CliResult<RunRecord> {
    match run {
        RunConfig::Prepare(r) => prepare::execute(r, out),
        RunConfig::Estimate(r) => estimate::execute(r, out),
        RunConfig::Curve(r) => curve::execute(r, out),
        RunConfig::Simulate(r) => simulate::execute(r, out),
    }
}

fn run_in_pool(run: RunConfig, threads: usize, out_dir: &Path) -> CliResult<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    let mut out = OutDir::create(out_dir)?;
    let record = pool.install(|| execute(&run, &mut out))?;
    let manifest = Manifest::new(run, pool.current_num_threads(), record, out.written().to_vec());
    out.write_text(MANIFEST_FILE, &manifest.to_json()?)?;
    log::info!("wrote {} files to {}", out.written().len(), out.root().display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let out_dir = resolve_out_dir(cli.out_dir, &cfg)?;
    let threads = cfg.pick(cli.threads, "threads", 0)?;
    let run = match &cli.command {
        Command::Prepare(a) => RunConfig::Prepare(prepare::PrepareRun::resolve(a, &cfg)?),
        Command::Estimate(a) => RunConfig::Estimate(estimate::EstimateRun::resolve(a, &cfg)?),
        Command::Curve(a) => RunConfig::Curve(curve::CurveRun::resolve(a, &cfg)?),
        Command::Simulate(a) => RunConfig::Simulate(simulate::SimulateRun::resolve(a, &cfg)?),
        Command::Rerun { manifest } => {
            let m = Manifest::load(manifest)?;
            m.verify_inputs()?;
            m.run
        }
    };
    run_in_pool(run, threads, &out_dir)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { 1 } else { 0 });
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(cli) {
        match e {
            CliError::Estimation(_) => eprintln!("{}", e.diagnostic()),
            _ => eprintln!("oudisc: error: {e}"),
        }
        std::process::exit(e.exit_code());
    }
}
