//! Long-horizon real discount rates from a mean-reverting (Ornstein-Uhlenbeck)
//! model of the real short rate.
//!
//! * [`ratecore`]: time series, real rates from nominal yields and inflation,
//!   and the empirical statistics computed on them.
//! * [`oumodel`]: closed-form discount function, long-run rate, transition
//!   law and negative-rate probabilities.
//! * [`estimation`]: maximum likelihood, market price of risk, bias
//!   correction and confidence quantiles.
//! * [`simulation`]: exact path simulation, surrogate yield series and the
//!   Monte Carlo discount estimator.
//! * [`ingest`]: CSV loading and dataset preparation with provenance.

pub mod error;
pub mod estimation;
pub mod ingest;
pub mod oumodel;
pub mod ratecore;
pub mod rng;
pub mod simulation;
pub mod special;
pub mod stats;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use estimation::{BiasCorrectionConfig, EstimationReport, PointEstimate};
pub use oumodel::{OuParams, RiskSpec};
pub use ratecore::{Frequency, RealRateSeries, TimeSeries};
pub use simulation::{DiscountCurve, SimConfig};
