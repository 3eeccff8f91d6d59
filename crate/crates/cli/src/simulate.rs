//! `oudisc simulate`: model statistics over simulated yield series.

use std::path::PathBuf;

use clap::Args;
use ou_discount::ratecore::HistogramBins;
use ou_discount::simulation::{self, InitialRate, ModelStatsConfig, SurrogateDesign, DEFAULT_STEPS_PER_YEAR};
use ou_discount::OuParams;
use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::curve::read_report;
use crate::error::{CliError, CliResult};
use crate::manifest::{FileDigest, RunRecord};
use crate::output::{fmt_num, OutDir, Table};

pub const STATISTICS_FILE: &str = "statistics.json";

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Take m, k, alpha and q from a report written by `oudisc estimate`
    #[arg(long, value_name = "JSON", conflicts_with_all = ["m", "k", "alpha", "q"])]
    pub report: Option<PathBuf>,
    /// Long-run mean of the short rate
    #[arg(long, allow_hyphen_values = true, required_unless_present = "report")]
    pub m: Option<f64>,
    /// Volatility
    #[arg(long, required_unless_present = "report")]
    pub k: Option<f64>,
    /// Mean-reversion rate (1/year)
    #[arg(long, required_unless_present = "report")]
    pub alpha: Option<f64>,
    /// Market price of risk [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Number of simulated data sets [default: 1000]
    #[arg(long)]
    pub reps: Option<usize>,
    /// Years per simulated data set [default: 100]
    #[arg(long)]
    pub years: Option<usize>,
    /// Simulation steps per year [default: 252]
    #[arg(long)]
    pub steps_per_year: Option<usize>,
    /// Master seed [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Short maturity in years; 0 uses the instantaneous rate [default: 0.25]
    #[arg(long)]
    pub short_maturity: Option<f64>,
    /// Long maturity in years [default: 10]
    #[arg(long)]
    pub long_maturity: Option<f64>,
    /// Noise-match the long series to this standard deviation
    #[arg(long, conflicts_with = "long_corr")]
    pub long_target_std: Option<f64>,
    /// Noise-match the long series to this short/long correlation
    #[arg(long)]
    pub long_corr: Option<f64>,
    /// Start every path at this rate instead of a stationary draw
    #[arg(long, allow_hyphen_values = true)]
    pub initial_rate: Option<f64>,
    /// Lower edge of the spread histogram [default: -0.15]
    #[arg(long, allow_hyphen_values = true)]
    pub bin_lower: Option<f64>,
    /// Upper edge of the spread histogram [default: 0.15]
    #[arg(long, allow_hyphen_values = true)]
    pub bin_upper: Option<f64>,
    /// Width of a histogram bin [default: 0.01]
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Write the series of the first N replicates as CSV [default: 0]
    #[arg(long, value_name = "N")]
    pub series: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum NoiseTarget {
    None,
    Std(f64),
    Correlation(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRun {
    /// Report the parameters came from, if any.
    pub report: Option<PathBuf>,
    pub params: OuParams,
    pub q: f64,
    pub reps: usize,
    pub seed: u64,
    pub design: SurrogateDesign,
    pub noise: NoiseTarget,
    pub bins: HistogramBins,
    pub series: usize,
}

impl SimulateRun {
    pub fn resolve(a: &SimulateArgs, cfg: &ConfigFile) -> CliResult<Self> {
        let (params, q) = match &a.report {
            Some(path) => {
                let r = read_report(path)?;
                (r.params, r.q)
            }
            None => {
                let (Some(m), Some(k), Some(alpha)) = (a.m, a.k, a.alpha) else {
                    return Err(CliError::Usage("give --report or all of --m, --k, --alpha".into()));
                };
                let p = OuParams::new(m, k, alpha).map_err(|e| CliError::Usage(e.to_string()))?;
                (p, a.q.unwrap_or(0.0))
            }
        };
        let years = cfg.pick(a.years, "years", 100)?;
        let mut design = SurrogateDesign::new(years);
        design.steps_per_year = cfg.pick(a.steps_per_year, "steps_per_year", DEFAULT_STEPS_PER_YEAR)?;
        design.short_maturity = cfg.pick(a.short_maturity, "short_maturity", design.short_maturity)?;
        design.long_maturity = cfg.pick(a.long_maturity, "long_maturity", design.long_maturity)?;
        if let Some(r) = cfg.pick_opt(a.initial_rate, "initial_rate")? {
            design.initial_rate = InitialRate::Given(r);
        }
        let std = cfg.pick_opt(a.long_target_std, "long_target_std")?;
        let corr = cfg.pick_opt(a.long_corr, "long_corr")?;
        let noise = match (std, corr) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "long_target_std and long_corr are mutually exclusive".into(),
                ))
            }
            (Some(s), None) => NoiseTarget::Std(s),
            (None, Some(c)) => NoiseTarget::Correlation(c),
            (None, None) => NoiseTarget::None,
        };
        let d = HistogramBins::default();
        let bins = HistogramBins {
            lower: cfg.pick(a.bin_lower, "bin_lower", d.lower)?,
            upper: cfg.pick(a.bin_upper, "bin_upper", d.upper)?,
            width: cfg.pick(a.bin_width, "bin_width", d.width)?,
        };
        if !(bins.width > 0.0 && bins.upper > bins.lower) {
            return Err(CliError::Usage(format!("bad histogram bins {bins:?}")));
        }
        Ok(SimulateRun {
            report: a.report.clone(),
            params,
            q,
            reps: cfg.pick(a.reps, "reps", 1000)?,
            seed: cfg.pick(a.seed, "seed", 1)?,
            design,
            noise,
            bins,
            series: cfg.pick(a.series, "series", 0)?,
        })
    }
}

#[derive(Serialize)]
struct StatisticsFile<'a> {
    units: &'static str,
    params: &'a OuParams,
    q: f64,
    design: &'a SurrogateDesign,
    statistics: &'a simulation::ModelStatistics,
}

pub fn execute(run: &SimulateRun, out: &mut OutDir) -> CliResult<RunRecord> {
    let inputs = match &run.report {
        Some(p) => vec![FileDigest::of_input(p).map_err(|e| CliError::Report(e.to_string()))?],
        None => Vec::new(),
    };
    let mut design = run.design;
    design.ten_year_target_std = match run.noise {
        NoiseTarget::None => None,
        NoiseTarget::Std(s) => Some(s),
        NoiseTarget::Correlation(c) => Some(
            simulation::long_target_std_from_correlation(&run.params, run.q, design.long_maturity, c)
                .map_err(|e| CliError::Usage(e.to_string()))?,
        ),
    };
    let cfg = ModelStatsConfig {
        design,
        seed: run.seed,
        bins: run.bins,
    };
    let stats =
        simulation::model_statistics(&run.params, run.q, &cfg, run.reps).map_err(|e| CliError::Usage(e.to_string()))?;
    out.write_json(
        STATISTICS_FILE,
        &StatisticsFile {
            units: "fractions; rates per year",
            params: &run.params,
            q: run.q,
            design: &design,
            statistics: &stats,
        },
    )?;

    let width = run.series.saturating_sub(1).to_string().len().max(4);
    for i in 0..run.series.min(run.reps) {
        let s = simulation::surrogate_sample(&run.params, run.q, &design, run.seed, i as u64)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut t = Table::new(&["year", "instantaneous", "short", "long"]);
        for y in 0..s.short.len() {
            t.push(vec![
                y.to_string(),
                fmt_num(s.instantaneous[y]),
                fmt_num(s.short[y]),
                fmt_num(s.long[y]),
            ]);
        }
        out.write_table(&format!("series/replicate_{i:0width$}.csv"), &t)?;
    }
    Ok(RunRecord {
        inputs,
        provenance: None,
    })
}
