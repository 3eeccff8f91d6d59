//! `oudisc estimate`: fit the model to prepared real-rate series.

use std::path::{Path, PathBuf};

use clap::Args;
use ou_discount::estimation::{self, PipelineOptions, DEFAULT_BLOCKS, DEFAULT_MAX_LAG};
use ou_discount::ingest::{self, RawSeriesFile, SeriesKind};
use ou_discount::simulation::DEFAULT_STEPS_PER_YEAR;
use ou_discount::BiasCorrectionConfig;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ConfigFile;
use crate::error::{report_err, CliError, CliResult};
use crate::manifest::{FileDigest, RunRecord};
use crate::output::OutDir;
use crate::prepare::{REAL_10Y_FILE, REAL_3M_FILE};

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Directory written by `oudisc prepare`
    #[arg(long, value_name = "DIR", required_unless_present_all = ["short", "long"], conflicts_with_all = ["short", "long"])]
    pub data: Option<PathBuf>,
    /// Annual short real-rate CSV (date,value as fractions)
    #[arg(long, value_name = "CSV", requires = "long")]
    pub short: Option<PathBuf>,
    /// Annual 10-year real-rate CSV (date,value as fractions)
    #[arg(long, value_name = "CSV", requires = "short")]
    pub long: Option<PathBuf>,
    /// Master seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report raw estimates only; skip bias correction and quantiles
    #[arg(long)]
    pub no_bias_correction: bool,
    /// Simulated data sets per bias-correction iteration and for quantiles [default: 1000]
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Simulation steps per year [default: 252]
    #[arg(long)]
    pub steps_per_year: Option<usize>,
    /// Damping of the bias-correction fixed point, in (0, 1] [default: 0.5]
    #[arg(long)]
    pub damping: Option<f64>,
    /// Bias-correction convergence tolerance [default: 0.001]
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Bias-correction iteration limit [default: 20]
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Number of blocks for the min/max parameter ranges [default: 4]
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Largest lag in the autocorrelation cross-check [default: 10]
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Do not noise-match simulated 10-year series to the data's spread
    #[arg(long)]
    pub no_match_long_std: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRun {
    pub short: PathBuf,
    pub long: PathBuf,
    pub pipeline: PipelineOptions,
}

impl EstimateRun {
    pub fn resolve(a: &EstimateArgs, cfg: &ConfigFile) -> CliResult<Self> {
        let (short, long) = match (&a.data, &a.short, &a.long) {
            (Some(dir), _, _) => (dir.join(REAL_3M_FILE), dir.join(REAL_10Y_FILE)),
            (None, Some(s), Some(l)) => (s.clone(), l.clone()),
            _ => return Err(CliError::Usage("give --data or both --short and --long".into())),
        };
        let bias = if cfg.switch(a.no_bias_correction, "bias_correction", true)? {
            let d = BiasCorrectionConfig::new(0);
            Some(BiasCorrectionConfig {
                replicates: cfg.pick(a.replicates, "replicates", d.replicates)?,
                steps_per_year: cfg.pick(a.steps_per_year, "steps_per_year", DEFAULT_STEPS_PER_YEAR)?,
                damping: cfg.pick(a.damping, "damping", d.damping)?,
                tolerance: cfg.pick(a.tolerance, "tolerance", d.tolerance)?,
                max_iterations: cfg.pick(a.max_iterations, "max_iterations", d.max_iterations)?,
                ..d
            })
        } else {
            None
        };
        Ok(EstimateRun {
            short,
            long,
            pipeline: PipelineOptions {
                n_blocks: cfg.pick(a.blocks, "blocks", DEFAULT_BLOCKS)?,
                max_lag: cfg.pick(a.max_lag, "max_lag", DEFAULT_MAX_LAG)?,
                bias,
                match_long_std: cfg.switch(a.no_match_long_std, "match_long_std", true)?,
                seed: cfg.pick(a.seed, "seed", 1)?,
            },
        })
    }
}

fn load(path: &Path) -> CliResult<ou_discount::TimeSeries> {
    ingest::load_csv(&RawSeriesFile::new(path, SeriesKind::AnnualFraction)).map_err(CliError::Ingest)
}

pub fn execute(run: &EstimateRun, out: &mut OutDir) -> CliResult<RunRecord> {
    let inputs = vec![FileDigest::of_input(&run.short)?, FileDigest::of_input(&run.long)?];
    let short = load(&run.short)?;
    let long = load(&run.long)?;
    let report = estimation::run_pipeline(&short, &long, &run.pipeline).map_err(CliError::Estimation)?;
    if let Some(bc) = &report.bias_correction {
        if !bc.converged {
            log::warn!(
                "bias correction stopped after {} iterations without converging (last change {:.3e})",
                bc.iterations,
                bc.last_change
            );
        }
    }
    let mut value = serde_json::to_value(&report).map_err(report_err)?;
    value["units"] = json!("fractions per year; alpha in 1/year");
    out.write_json(REPORT_FILE, &value)?;
    Ok(RunRecord {
        inputs,
        provenance: None,
    })
}
