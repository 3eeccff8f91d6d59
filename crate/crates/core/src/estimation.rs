//! Parameter estimation for the OU real-rate model.
//!
//! The point estimates come from the exact AR(1) likelihood of annually
//! sampled short rates. The market price of risk is calibrated from the mean
//! long-maturity yield. Because the observed short series is a 3-month
//! yield sampled once a year rather than the instantaneous rate, the raw
//! estimates are biased; [`bias_correct`] removes that bias by simulation
//! and [`confidence_quantiles`] measures the sampling spread the same way.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oumodel::{self, OuParams};
use crate::ratecore::{RealRateSeries, TimeSeries};
use crate::rng::{derive_seed, stream_rng};
use crate::simulation::{self, InitialRate, SurrogateCurves, SurrogateDesign, DEFAULT_STEPS_PER_YEAR};
use crate::stats;

pub const MIN_MLE_LENGTH: usize = 10;
pub const DEFAULT_MAX_LAG: usize = 10;
pub const DEFAULT_BLOCKS: usize = 4;
/// Maturity of the long yield used to calibrate `q`.
pub const LONG_MATURITY: f64 = 10.0;
const MAX_FAILURE_SHARE: f64 = 0.2;

/// Exact-discretization maximum likelihood for an OU process sampled every
/// `dt` years.
///
/// The transition over `dt` is the AR(1) `r' = c + phi r + e` with
/// `phi = exp(-alpha dt)`, `c = m (1 - phi)` and
/// `Var e = k^2 (1 - phi^2) / (2 alpha)`. Conditional on the first value the
/// likelihood is maximized by least squares, with the residual variance
/// divided by the number of transitions.
pub fn mle_ou(values: &[f64], dt: f64) -> Result<OuParams> {
    if values.len() < MIN_MLE_LENGTH {
        return Err(Error::TooShort {
            needed: MIN_MLE_LENGTH,
            got: values.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::domain(format!("sampling step dt = {dt} must be positive")));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::DegenerateVariance);
    }
    let x = &values[..values.len() - 1];
    let y = &values[1..];
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let phi = sxy / sxx;
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::NotMeanReverting(phi));
    }
    let c = my - phi * mx;
    let resid_var = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let e = b - c - phi * a;
            e * e
        })
        .sum::<f64>()
        / n;
    let alpha = -phi.ln() / dt;
    let k = (resid_var * 2.0 * alpha / (1.0 - phi * phi)).sqrt();
    OuParams::new(c / (1.0 - phi), k, alpha)
}

pub fn mle_ou_annual(series: &RealRateSeries, dt: f64) -> Result<OuParams> {
    mle_ou(series.values(), dt)
}

/// Reversion rate from an exponential fit to the sample autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaFit {
    pub alpha: f64,
    /// Least-squares standard error; absent when only one lag is usable.
    pub stderr: Option<f64>,
    pub lags_used: usize,
}

/// Fits `rho(lag) = exp(-alpha lag)` by least squares on `ln rho` through
/// the origin.
pub fn fit_exponential_decay(lags: &[f64], rho: &[f64]) -> Result<AlphaFit> {
    if lags.len() != rho.len() || lags.is_empty() {
        return Err(Error::FitFailure("no lags to fit".into()));
    }
    if rho.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::FitFailure("autocorrelations must be positive".into()));
    }
    let sll: f64 = lags.iter().map(|l| l * l).sum();
    let alpha = -lags.iter().zip(rho).map(|(l, r)| l * r.ln()).sum::<f64>() / sll;
    let stderr = if lags.len() > 1 {
        let ss: f64 = lags
            .iter()
            .zip(rho)
            .map(|(l, r)| {
                let e = r.ln() + alpha * l;
                e * e
            })
            .sum();
        Some((ss / (lags.len() - 1) as f64 / sll).sqrt())
    } else {
        None
    };
    Ok(AlphaFit {
        alpha,
        stderr,
        lags_used: lags.len(),
    })
}

/// Sample autocorrelation at lags `1..=max_lag`, fitted up to the first
/// non-positive value. Lags are in sampling steps of `dt` years.
pub fn fit_alpha_autocorrelation(values: &[f64], max_lag: usize, dt: f64) -> Result<AlphaFit> {
    if max_lag == 0 {
        return Err(Error::InvalidConfig("max_lag must be >= 1".into()));
    }
    if values.len() < 3 * max_lag {
        return Err(Error::TooShort {
            needed: 3 * max_lag,
            got: values.len(),
        });
    }
    let mu = stats::mean(values)?;
    let dev: Vec<f64> = values.iter().map(|v| v - mu).collect();
    let c0: f64 = dev.iter().map(|d| d * d).sum();
    if c0 == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let mut lags = Vec::new();
    let mut rho = Vec::new();
    for lag in 1..=max_lag {
        let c: f64 = dev.iter().zip(&dev[lag..]).map(|(a, b)| a * b).sum();
        let r = c / c0;
        if r <= 0.0 {
            break;
        }
        lags.push(lag as f64 * dt);
        rho.push(r);
    }
    if lags.is_empty() {
        return Err(Error::FitFailure("lag-1 autocorrelation is not positive".into()));
    }
    fit_exponential_decay(&lags, &rho)
}

/// `k = sigma sqrt(2 alpha)`.
pub fn k_from_sigma(sigma: f64, alpha: f64) -> Result<f64> {
    if !(sigma >= 0.0) || !(alpha > 0.0) {
        return Err(Error::domain(format!(
            "need sigma >= 0 and alpha > 0, got {sigma}, {alpha}"
        )));
    }
    Ok(sigma * (2.0 * alpha).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockMinMax {
    pub n_blocks: usize,
    pub m: Range,
    pub k: Range,
    /// The full-sample reversion rate every block was fitted with.
    pub alpha_fixed: f64,
}

/// Re-estimates `m` and `k` on contiguous blocks with `alpha` held at its
/// full-sample value. The remainder of an uneven split goes to the last
/// block.
pub fn block_minmax(values: &[f64], n_blocks: usize, dt: f64) -> Result<BlockMinMax> {
    let full = mle_ou(values, dt)?;
    block_minmax_with_alpha(values, n_blocks, full.alpha, dt)
}

pub fn block_minmax_with_alpha(values: &[f64], n_blocks: usize, alpha: f64, dt: f64) -> Result<BlockMinMax> {
    if n_blocks == 0 {
        return Err(Error::InvalidConfig("n_blocks must be >= 1".into()));
    }
    let size = values.len() / n_blocks;
    if size < 5 {
        return Err(Error::TooShort {
            needed: 5 * n_blocks,
            got: values.len(),
        });
    }
    let phi = (-alpha * dt).exp();
    let mut m = Range {
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    let mut k = m;
    for b in 0..n_blocks {
        let end = if b + 1 == n_blocks {
            values.len()
        } else {
            (b + 1) * size
        };
        let block = &values[b * size..end];
        let x = &block[..block.len() - 1];
        let y = &block[1..];
        let n = x.len() as f64;
        let mb = x.iter().zip(y).map(|(a, b)| b - phi * a).sum::<f64>() / (n * (1.0 - phi));
        let resid_var = x
            .iter()
            .zip(y)
            .map(|(&a, &b)| {
                let e = b - mb * (1.0 - phi) - phi * a;
                e * e
            })
            .sum::<f64>()
            / n;
        let kb = (resid_var * 2.0 * alpha / (1.0 - phi * phi)).sqrt();
        m.min = m.min.min(mb);
        m.max = m.max.max(mb);
        k.min = k.min.min(kb);
        k.max = k.max.max(kb);
    }
    Ok(BlockMinMax {
        n_blocks,
        m,
        k,
        alpha_fixed: alpha,
    })
}

/// Market price of risk from mean yields.
///
/// The mean short yield stands in for the current rate in the discount
/// formula; the mean 10-year yield then fixes `m*`, which enters the yield
/// affinely, and `q = (m* - m) alpha / k`.
pub fn estimate_q(mean_short: f64, mean_long: f64, params: &OuParams) -> Result<f64> {
    params.validate()?;
    if params.k == 0.0 {
        return Err(Error::IllConditioned("q is undefined when k = 0".into()));
    }
    // yield = m* w + const + slope r, and at m* = 0 the yield is const + slope r
    let at_zero = OuParams { m: 0.0, ..*params };
    let base = oumodel::yield_coefficients(&at_zero, 0.0, LONG_MATURITY)?;
    let weight = 1.0 - base.slope;
    if weight < 1e-10 {
        return Err(Error::IllConditioned(format!(
            "alpha tau = {} leaves m* unidentified",
            params.alpha * LONG_MATURITY
        )));
    }
    let m_star = (mean_long - base.at(mean_short)) / weight;
    Ok((m_star - params.m) * params.alpha / params.k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub params: OuParams,
    pub q: f64,
}

impl PointEstimate {
    pub fn m_star(&self) -> f64 {
        oumodel::risk_adjusted_mean(&self.params, self.q).m_star
    }

    pub fn r_infinity(&self) -> f64 {
        oumodel::long_run_rate(&self.params, self.q)
    }

    pub fn shifted(&self, shift: &ParamShift) -> Result<PointEstimate> {
        let params = OuParams::new(
            self.params.m + shift.m,
            self.params.k + shift.k,
            self.params.alpha + shift.alpha,
        )?;
        Ok(PointEstimate {
            params,
            q: self.q + shift.q,
        })
    }
}

/// Additive correction `corrected - raw` for each parameter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamShift {
    pub m: f64,
    pub k: f64,
    pub alpha: f64,
    pub q: f64,
}

impl ParamShift {
    pub fn between(from: &PointEstimate, to: &PointEstimate) -> Self {
        ParamShift {
            m: to.params.m - from.params.m,
            k: to.params.k - from.params.k,
            alpha: to.params.alpha - from.params.alpha,
            q: to.q - from.q,
        }
    }
}

/// Raw estimate from a short series (MLE) and the overlapping means of the
/// short and long series (for `q`).
pub fn estimate_point(short: &[f64], overlap_short_mean: f64, overlap_long_mean: f64) -> Result<PointEstimate> {
    let params = mle_ou(short, 1.0)?;
    let q = estimate_q(overlap_short_mean, overlap_long_mean, &params)?;
    Ok(PointEstimate { params, q })
}

fn estimate_from_samples(short: &[f64], long: &[f64]) -> Result<PointEstimate> {
    estimate_point(short, stats::mean(short)?, stats::mean(long)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasCorrectionConfig {
    pub replicates: usize,
    pub steps_per_year: usize,
    pub years: usize,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Maturity of the simulated short yield; `0` uses the instantaneous rate.
    pub short_maturity: f64,
    /// Standard deviation the simulated 10-year series is noise-matched to.
    pub ten_year_target_std: Option<f64>,
    pub initial_rate: InitialRate,
}

impl BiasCorrectionConfig {
    pub fn new(years: usize) -> Self {
        BiasCorrectionConfig {
            replicates: 1000,
            steps_per_year: DEFAULT_STEPS_PER_YEAR,
            years,
            damping: 0.5,
            tolerance: 1e-3,
            max_iterations: 20,
            short_maturity: 0.25,
            ten_year_target_std: None,
            initial_rate: InitialRate::Stationary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be >= 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig(format!("damping {} outside (0, 1]", self.damping)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if self.years < MIN_MLE_LENGTH {
            return Err(Error::InvalidConfig(format!(
                "years = {} is below the estimator minimum of {MIN_MLE_LENGTH}",
                self.years
            )));
        }
        self.design().validate()
    }

    pub fn design(&self) -> SurrogateDesign {
        SurrogateDesign {
            years: self.years,
            steps_per_year: self.steps_per_year,
            short_maturity: self.short_maturity,
            long_maturity: LONG_MATURITY,
            ten_year_target_std: self.ten_year_target_std,
            initial_rate: self.initial_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSet {
    pub estimates: Vec<PointEstimate>,
    pub failures: usize,
}

/// Simulates `n_reps` surrogate data sets at `truth`, re-estimates each and
/// adds `shift`. Replicate `i` uses stream `i` of `seed`. Failed
/// estimations are dropped and counted; more than 20% failures is an error.
pub fn replicate_estimates(
    truth: &PointEstimate,
    design: &SurrogateDesign,
    shift: &ParamShift,
    n_reps: usize,
    seed: u64,
) -> Result<ReplicateSet> {
    truth.params.validate()?;
    design.validate()?;
    if n_reps == 0 {
        return Err(Error::InvalidConfig("replicates must be >= 1".into()));
    }
    let curves = SurrogateCurves::new(&truth.params, truth.q, design)?;
    let outcomes: Vec<Option<PointEstimate>> = (0..n_reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let sample = simulation::surrogate_sample_with(&truth.params, &curves, design, &mut rng).ok()?;
            let raw = estimate_from_samples(&sample.short, &sample.long).ok()?;
            raw.shifted(shift).ok()
        })
        .collect();
    let failures = outcomes.iter().filter(|o| o.is_none()).count();
    if failures as f64 > MAX_FAILURE_SHARE * n_reps as f64 {
        return Err(Error::TooManyFailures {
            failed: failures,
            total: n_reps,
        });
    }
    Ok(ReplicateSet {
        estimates: outcomes.into_iter().flatten().collect(),
        failures,
    })
}

fn mean_estimate(set: &ReplicateSet) -> PointEstimate {
    let n = set.estimates.len() as f64;
    let (mut m, mut k, mut a, mut q) = (0.0, 0.0, 0.0, 0.0);
    for e in &set.estimates {
        m += e.params.m;
        k += e.params.k;
        a += e.params.alpha;
        q += e.q;
    }
    PointEstimate {
        params: OuParams {
            m: m / n,
            k: k / n,
            alpha: a / n,
        },
        q: q / n,
    }
}

/// Size of a parameter update: `m` relative to `k`, `k` and `alpha`
/// relative to themselves, `q` absolute.
fn change_metric(from: &PointEstimate, to: &PointEstimate) -> f64 {
    let scale_k = from.params.k.abs().max(1e-12);
    [
        (to.params.m - from.params.m).abs() / scale_k,
        (to.params.k - from.params.k).abs() / scale_k,
        (to.params.alpha - from.params.alpha).abs() / from.params.alpha,
        (to.q - from.q).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasCorrection {
    pub corrected: PointEstimate,
    /// `corrected - raw`, to be added to every replicate's raw estimate.
    pub shift: ParamShift,
    pub iterations: usize,
    pub converged: bool,
    pub last_change: f64,
    pub failures_last_iteration: usize,
}

/// Finds instantaneous parameters whose surrogate re-estimates average to
/// the raw estimates. Every iteration reuses the same random streams, so
/// the map being inverted is deterministic and the damped iteration
/// `theta += damping (raw - mean_estimate(theta))` settles on a precise
/// fixed point. Without convergence the final iterate is returned with
/// `converged = false`.
pub fn bias_correct(raw: &PointEstimate, cfg: &BiasCorrectionConfig, seed: u64) -> Result<BiasCorrection> {
    bias_correct_with_start(raw, raw, cfg, seed)
}

pub fn bias_correct_with_start(
    raw: &PointEstimate,
    start: &PointEstimate,
    cfg: &BiasCorrectionConfig,
    seed: u64,
) -> Result<BiasCorrection> {
    cfg.validate()?;
    raw.params.validate()?;
    start.params.validate()?;
    let design = cfg.design();
    let zero = ParamShift::default();
    let mut theta = *start;
    let mut last_change = f64::INFINITY;
    let mut failures = 0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let set = replicate_estimates(&theta, &design, &zero, cfg.replicates, seed)?;
        failures = set.failures;
        let mean = mean_estimate(&set);
        let mut step = ParamShift::between(&mean, raw);
        step.m *= cfg.damping;
        step.k *= cfg.damping;
        step.alpha *= cfg.damping;
        step.q *= cfg.damping;
        let mut proposal = theta.shifted(&step);
        let mut halvings = 0;
        while proposal.is_err() && halvings < 40 {
            step.m *= 0.5;
            step.k *= 0.5;
            step.alpha *= 0.5;
            step.q *= 0.5;
            proposal = theta.shifted(&step);
            halvings += 1;
        }
        let proposal = proposal?;
        last_change = change_metric(&theta, &proposal);
        log::debug!("bias correction iteration {iterations}: change {last_change:.3e}");
        theta = proposal;
        if last_change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("bias correction stopped after {iterations} iterations (change {last_change:.3e})");
    }
    Ok(BiasCorrection {
        corrected: theta,
        shift: ParamShift::between(raw, &theta),
        iterations,
        converged,
        last_change,
        failures_last_iteration: failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub q05: f64,
    pub q95: f64,
}

impl Band {
    pub fn contains(&self, x: f64) -> bool {
        self.q05 <= x && x <= self.q95
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileBands {
    pub m: Band,
    pub k: Band,
    pub alpha: Band,
    pub q: Band,
    pub r_infinity: Band,
    pub replicates: usize,
    pub failures: usize,
}

fn band_of(mut xs: Vec<f64>) -> Result<Band> {
    let (q05, q95) = stats::quantile_pair(&mut xs, 0.05, 0.95)?;
    Ok(Band { q05, q95 })
}

/// 5% and 95% quantiles of the re-estimated parameters over surrogate data
/// sets simulated at `estimate`.
pub fn confidence_quantiles(estimate: &PointEstimate, cfg: &BiasCorrectionConfig, seed: u64) -> Result<QuantileBands> {
    confidence_quantiles_shifted(estimate, &ParamShift::default(), cfg, seed)
}

/// As [`confidence_quantiles`], with every replicate estimate moved by the
/// bias-correction `shift` applied to the data.
pub fn confidence_quantiles_shifted(
    estimate: &PointEstimate,
    shift: &ParamShift,
    cfg: &BiasCorrectionConfig,
    seed: u64,
) -> Result<QuantileBands> {
    cfg.validate()?;
    let set = replicate_estimates(estimate, &cfg.design(), shift, cfg.replicates, seed)?;
    let pick = |f: fn(&PointEstimate) -> f64| set.estimates.iter().map(f).collect::<Vec<_>>();
    Ok(QuantileBands {
        m: band_of(pick(|e| e.params.m))?,
        k: band_of(pick(|e| e.params.k))?,
        alpha: band_of(pick(|e| e.params.alpha))?,
        q: band_of(pick(|e| e.q))?,
        r_infinity: band_of(pick(|e| e.r_infinity()))?,
        replicates: cfg.replicates,
        failures: set.failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub n_blocks: usize,
    pub max_lag: usize,
    /// `None` skips bias correction and quantiles.
    pub bias: Option<BiasCorrectionConfig>,
    /// Noise-match the simulated 10-year series to the data's 10-year std.
    pub match_long_std: bool,
    pub seed: u64,
}

impl PipelineOptions {
    pub fn new(seed: u64) -> Self {
        PipelineOptions {
            n_blocks: DEFAULT_BLOCKS,
            max_lag: DEFAULT_MAX_LAG,
            bias: Some(BiasCorrectionConfig::new(0)),
            match_long_std: true,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub short_first_year: i32,
    pub short_last_year: i32,
    pub short_count: usize,
    pub overlap_first_year: i32,
    pub overlap_last_year: i32,
    pub overlap_count: usize,
    /// Arithmetic means over the overlapping years, used to calibrate `q`.
    pub mean_short_overlap: f64,
    pub mean_long_overlap: f64,
    pub std_long_overlap: f64,
    pub std_short: f64,
    pub alpha_mle: f64,
    pub alpha_autocorrelation: Option<AlphaFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    /// Final parameters (bias-corrected unless correction was disabled).
    pub params: OuParams,
    pub q: f64,
    pub m_star: f64,
    pub r_infinity: f64,
    pub raw: PointEstimate,
    pub raw_m_star: f64,
    pub raw_r_infinity: f64,
    pub bias_correction: Option<BiasCorrection>,
    pub block_min_max: BlockMinMax,
    pub quantiles: Option<QuantileBands>,
    /// Stderr of the exponential autocorrelation fit, when available.
    pub alpha_stderr: Option<f64>,
    /// Surrogate design used for correction and quantiles.
    pub design: Option<BiasCorrectionConfig>,
    pub seed: u64,
    pub diagnostics: Diagnostics,
}

impl EstimationReport {
    pub fn point(&self) -> PointEstimate {
        PointEstimate {
            params: self.params,
            q: self.q,
        }
    }

    pub fn shift(&self) -> ParamShift {
        self.bias_correction.as_ref().map(|b| b.shift).unwrap_or_default()
    }
}

/// Full estimation on annual short and long real-rate series: MLE, block
/// ranges, autocorrelation cross-check, `q` calibration, bias correction,
/// quantile bands and the long-run rate.
pub fn run_pipeline(short: &TimeSeries, long: &TimeSeries, opts: &PipelineOptions) -> Result<EstimationReport> {
    let short = short.to_annual();
    let long = long.to_annual();
    let (first, s_overlap, l_overlap) = crate::ratecore::align_annual(&short, &long)?;
    if s_overlap.len() < 2 {
        return Err(Error::InsufficientOverlap {
            what: "short and long series",
            required: 2,
            available: s_overlap.len(),
        });
    }
    let values = short.values();
    let mean_short_overlap = stats::mean(&s_overlap)?;
    let mean_long_overlap = stats::mean(&l_overlap)?;
    let std_long_overlap = stats::sample_std(&l_overlap)?;

    let raw = estimate_point(values, mean_short_overlap, mean_long_overlap)?;
    let block_min_max = block_minmax_with_alpha(values, opts.n_blocks, raw.params.alpha, 1.0)?;
    let acf = match fit_alpha_autocorrelation(values, opts.max_lag, 1.0) {
        Ok(fit) => Some(fit),
        Err(e) => {
            log::warn!("autocorrelation fit unavailable: {e}");
            None
        }
    };

    let (bias_correction, quantiles, design) = match &opts.bias {
        None => (None, None, None),
        Some(base) => {
            let mut cfg = *base;
            cfg.years = values.len();
            cfg.ten_year_target_std = if opts.match_long_std {
                Some(std_long_overlap)
            } else {
                None
            };
            let bc = bias_correct(&raw, &cfg, derive_seed(opts.seed, 1))?;
            let qb = confidence_quantiles_shifted(&bc.corrected, &bc.shift, &cfg, derive_seed(opts.seed, 2))?;
            (Some(bc), Some(qb), Some(cfg))
        }
    };
    let point = bias_correction.as_ref().map(|b| b.corrected).unwrap_or(raw);

    Ok(EstimationReport {
        params: point.params,
        q: point.q,
        m_star: point.m_star(),
        r_infinity: point.r_infinity(),
        raw,
        raw_m_star: raw.m_star(),
        raw_r_infinity: raw.r_infinity(),
        bias_correction,
        block_min_max,
        quantiles,
        alpha_stderr: acf.and_then(|a| a.stderr),
        design,
        seed: opts.seed,
        diagnostics: Diagnostics {
            short_first_year: short.first_year(),
            short_last_year: short.last_year(),
            short_count: values.len(),
            overlap_first_year: first,
            overlap_last_year: first + s_overlap.len() as i32 - 1,
            overlap_count: s_overlap.len(),
            mean_short_overlap,
            mean_long_overlap,
            std_long_overlap,
            std_short: stats::sample_std(values)?,
            alpha_mle: raw.params.alpha,
            alpha_autocorrelation: acf,
        },
    })
}
