//! `oudisc prepare`: nominal yields and CPI in, annual real-rate series out.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ou_discount::ingest::{self, DatasetFiles, PrepareOptions, PreparedDataset, RawSeriesFile, SeriesKind};
use ou_discount::TimeSeries;
use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};
use crate::manifest::{FileDigest, RunRecord};
use crate::output::{fmt_num, OutDir, Table};

pub const REAL_3M_FILE: &str = "real_3m.csv";
pub const REAL_10Y_FILE: &str = "real_10y.csv";
pub const NOMINAL_FILE: &str = "nominal_log_yields.csv";
pub const INFLATION_FILE: &str = "inflation.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// One value per year, in percent
    Annual,
    /// One value per month, in percent; sampled at year end
    Monthly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpiKind {
    /// Annual CPI growth in percent
    Growth,
    /// Annual CPI index level
    Index,
}

macro_rules! from_str_via_value_enum {
    ($t:ty) => {
        impl std::str::FromStr for $t {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                <$t as ValueEnum>::from_str(s, true)
            }
        }
    };
}
from_str_via_value_enum!(RateKind);
from_str_via_value_enum!(CpiKind);

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// CSV of nominal 3-month rates in percent
    #[arg(long = "nominal-3m", value_name = "CSV")]
    pub nominal_3m: PathBuf,
    #[arg(long = "nominal-3m-kind", value_enum)]
    pub nominal_3m_kind: Option<RateKind>,
    /// CSV of nominal 10-year rates in percent
    #[arg(long = "nominal-10y", value_name = "CSV")]
    pub nominal_10y: PathBuf,
    #[arg(long = "nominal-10y-kind", value_enum)]
    pub nominal_10y_kind: Option<RateKind>,
    /// CSV of annual CPI growth (percent) or index levels
    #[arg(long, value_name = "CSV")]
    pub cpi: PathBuf,
    #[arg(long = "cpi-kind", value_enum)]
    pub cpi_kind: Option<CpiKind>,
    /// Name of the date column in all three files [default: date]
    #[arg(long)]
    pub date_column: Option<String>,
    /// Name of the value column in all three files [default: value]
    #[arg(long)]
    pub value_column: Option<String>,
    /// Years of future inflation subtracted from the 10-year yield [default: 10]
    #[arg(long)]
    pub long_window_years: Option<usize>,
    /// Minimum number of prepared years for each series [default: 30]
    #[arg(long)]
    pub min_years: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareRun {
    pub files: DatasetFiles,
    pub options: PrepareOptions,
}

impl PrepareRun {
    pub fn resolve(a: &PrepareArgs, cfg: &ConfigFile) -> CliResult<Self> {
        let date_column = cfg.pick(a.date_column.clone(), "date_column", "date".to_string())?;
        let value_column = cfg.pick(a.value_column.clone(), "value_column", "value".to_string())?;
        let rate_kind = |k: RateKind| match k {
            RateKind::Annual => SeriesKind::AnnualRatePercent,
            RateKind::Monthly => SeriesKind::MonthlyRatePercent,
        };
        let file = |path: &PathBuf, kind: SeriesKind| RawSeriesFile {
            path: path.clone(),
            kind,
            date_column: date_column.clone(),
            value_column: value_column.clone(),
        };
        let cpi_kind = match cfg.pick(a.cpi_kind, "cpi_kind", CpiKind::Growth)? {
            CpiKind::Growth => SeriesKind::CpiGrowthPercent,
            CpiKind::Index => SeriesKind::CpiIndexLevel,
        };
        let defaults = PrepareOptions::default();
        Ok(PrepareRun {
            files: DatasetFiles {
                nominal_3m: file(
                    &a.nominal_3m,
                    rate_kind(cfg.pick(a.nominal_3m_kind, "nominal_3m_kind", RateKind::Annual)?),
                ),
                nominal_10y: file(
                    &a.nominal_10y,
                    rate_kind(cfg.pick(a.nominal_10y_kind, "nominal_10y_kind", RateKind::Annual)?),
                ),
                cpi: file(&a.cpi, cpi_kind),
            },
            options: PrepareOptions {
                long_window_years: cfg.pick(a.long_window_years, "long_window_years", defaults.long_window_years)?,
                min_years: cfg.pick(a.min_years, "min_years", defaults.min_years)?,
            },
        })
    }
}

fn series_table(s: &TimeSeries) -> Table {
    let mut t = Table::new(&["date", "value"]);
    for (i, v) in s.values().iter().enumerate() {
        t.push(vec![(s.first_year() + i as i32).to_string(), fmt_num(*v)]);
    }
    t
}

fn nominal_table(d: &PreparedDataset) -> Table {
    let (a, b) = (&d.nominal_3m, &d.nominal_10y);
    let first = a.first_year().min(b.first_year());
    let last = a.last_year().max(b.last_year());
    let cell = |s: &TimeSeries, y: i32| s.value_in_year(y).map(fmt_num).unwrap_or_default();
    let mut t = Table::new(&["date", "y_3m", "y_10y"]);
    for y in first..=last {
        t.push(vec![y.to_string(), cell(a, y), cell(b, y)]);
    }
    t
}

pub fn execute(run: &PrepareRun, out: &mut OutDir) -> CliResult<RunRecord> {
    let data = ingest::prepare_from_files(&run.files, &run.options).map_err(CliError::Ingest)?;
    for w in &data.provenance.warnings {
        log::warn!("{w}");
    }
    out.write_table(REAL_3M_FILE, &series_table(&data.three_month_real.base))?;
    out.write_table(REAL_10Y_FILE, &series_table(&data.ten_year_real.base))?;
    out.write_table(NOMINAL_FILE, &nominal_table(&data))?;
    out.write_table(INFLATION_FILE, &series_table(&data.inflation_annual))?;
    let inputs = data
        .provenance
        .inputs
        .iter()
        .map(|i| FileDigest {
            path: i.path.clone(),
            sha256: i.sha256.clone(),
        })
        .collect();
    Ok(RunRecord {
        inputs,
        provenance: Some(data.provenance),
    })
}
