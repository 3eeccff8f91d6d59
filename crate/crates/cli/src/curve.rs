//! `oudisc curve`: discount-rate curve with 5% and 95% bands from a report.

use std::path::PathBuf;

use clap::Args;
use ou_discount::estimation::ParamShift;
use ou_discount::rng::derive_seed;
use ou_discount::simulation::{self, DiscountCurve};
use ou_discount::{BiasCorrectionConfig, EstimationReport};
use serde::{Deserialize, Serialize};

use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};
use crate::manifest::{FileDigest, RunRecord};
use crate::output::{fmt_num, OutDir, Table};
use crate::svg::{line_chart, Line};

pub const CURVE_CSV: &str = "curve.csv";
pub const CURVE_SVG: &str = "curve.svg";

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Report written by `oudisc estimate`
    #[arg(long, value_name = "JSON")]
    pub report: PathBuf,
    /// Number of log-spaced maturities [default: 61]
    #[arg(long)]
    pub points: Option<usize>,
    /// Shortest maturity in years [default: 0.25]
    #[arg(long)]
    pub tau_min: Option<f64>,
    /// Longest maturity in years [default: 1000]
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Current short rate [default: the estimated m]
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<f64>,
    /// Simulated data sets for the bands [default: the report's design]
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Simulation steps per year [default: the report's design]
    #[arg(long)]
    pub steps_per_year: Option<usize>,
    /// Seed for the band replicates [default: derived from the report seed]
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRun {
    pub report: PathBuf,
    pub points: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    /// `None` uses the report's m.
    pub r0: Option<f64>,
    /// `None` uses the report's design.
    pub replicates: Option<usize>,
    pub steps_per_year: Option<usize>,
    /// `None` derives a seed from the report's seed.
    pub seed: Option<u64>,
}

impl CurveRun {
    pub fn resolve(a: &CurveArgs, cfg: &ConfigFile) -> CliResult<Self> {
        Ok(CurveRun {
            report: a.report.clone(),
            points: cfg.pick(a.points, "points", 61)?,
            tau_min: cfg.pick(a.tau_min, "tau_min", 0.25)?,
            tau_max: cfg.pick(a.tau_max, "tau_max", 1000.0)?,
            r0: cfg.pick_opt(a.r0, "r0")?,
            replicates: cfg.pick_opt(a.replicates, "replicates")?,
            steps_per_year: cfg.pick_opt(a.steps_per_year, "steps_per_year")?,
            seed: cfg.pick_opt(a.seed, "seed")?,
        })
    }
}

/// `n` maturities evenly spaced in log between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> CliResult<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(CliError::Usage(format!(
            "maturity grid needs 0 < tau_min < tau_max and at least 2 points (got {lo}, {hi}, {n})"
        )));
    }
    let ratio = (hi / lo).ln();
    let mut g: Vec<f64> = (0..n).map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp()).collect();
    g[n - 1] = hi;
    Ok(g)
}

pub fn read_report(path: &PathBuf) -> CliResult<EstimationReport> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Report(format!("cannot read report {}: {e}", path.display())))?;
    let report: EstimationReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Report(format!("{}: malformed report: {e}", path.display())))?;
    report
        .params
        .validate()
        .map_err(|e| CliError::Report(format!("{}: invalid parameters: {e}", path.display())))?;
    Ok(report)
}

fn band_config(report: &EstimationReport, run: &CurveRun) -> BiasCorrectionConfig {
    let mut cfg = report.design.unwrap_or_else(|| {
        let mut c = BiasCorrectionConfig::new(report.diagnostics.short_count);
        c.ten_year_target_std = Some(report.diagnostics.std_long_overlap);
        c
    });
    if let Some(n) = run.replicates {
        cfg.replicates = n;
    }
    if let Some(s) = run.steps_per_year {
        cfg.steps_per_year = s;
    }
    cfg
}

fn curve_table(c: &DiscountCurve) -> Table {
    let mut t = Table::new(&["tau", "rate", "band_5", "band_95"]);
    for i in 0..c.taus.len() {
        t.push(vec![
            fmt_num(c.taus[i]),
            fmt_num(c.rates[i]),
            fmt_num(c.band_5[i]),
            fmt_num(c.band_95[i]),
        ]);
    }
    t
}

pub fn execute(run: &CurveRun, out: &mut OutDir) -> CliResult<RunRecord> {
    let report = read_report(&run.report)?;
    let inputs = vec![FileDigest::of_input(&run.report).map_err(|e| CliError::Report(e.to_string()))?];
    let grid = log_grid(run.tau_min, run.tau_max, run.points)?;
    let r0 = run.r0.unwrap_or(report.params.m);
    let cfg = band_config(&report, run);
    let shift: ParamShift = report.shift();
    let seed = run.seed.unwrap_or_else(|| derive_seed(report.seed, 3));
    let curve = simulation::discount_curve_with_bands(&report.point(), &shift, r0, &grid, &cfg, cfg.replicates, seed)
        .map_err(CliError::Estimation)?;

    out.write_table(CURVE_CSV, &curve_table(&curve))?;
    let svg = line_chart(
        "Annualized discount rate -ln D(tau) / tau",
        "time to maturity tau (years, log scale)",
        "rate (%)",
        &curve.taus,
        &[
            Line {
                label: "point estimate",
                ys: &curve.rates,
                color: "#c0392b",
                dashed: false,
            },
            Line {
                label: "5% quantile",
                ys: &curve.band_5,
                color: "#2c3e50",
                dashed: true,
            },
            Line {
                label: "95% quantile",
                ys: &curve.band_95,
                color: "#2c3e50",
                dashed: true,
            },
        ],
        100.0,
    );
    out.write_text(CURVE_SVG, &svg)?;
    Ok(RunRecord {
        inputs,
        provenance: None,
    })
}
