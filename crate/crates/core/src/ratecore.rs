//! Real-rate construction and the descriptive statistics computed on
//! historical (or simulated) rate series.
//!
//! Rates are fractions per year throughout. Annual series are keyed by
//! calendar year; monthly series are reduced to annual frequency by taking
//! the last observation of each calendar year.

use chrono::{Datelike, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    Annual,
    Monthly,
}

impl Frequency {
    fn months(self) -> u32 {
        match self {
            Frequency::Annual => 12,
            Frequency::Monthly => 1,
        }
    }
}

/// Regularly spaced scalar observations with no gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    start: NaiveDate,
    frequency: Frequency,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(start: NaiveDate, frequency: Frequency, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("time series"));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at index {bad}")));
        }
        Ok(TimeSeries {
            start,
            frequency,
            values,
        })
    }

    /// Annual series starting on 31 December of `first_year`.
    pub fn annual(first_year: i32, values: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(first_year, 12, 31)
            .ok_or_else(|| Error::domain(format!("year {first_year} out of range")))?;
        TimeSeries::new(start, Frequency::Annual, values)
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        let months = self.frequency.months() * index as u32;
        self.start
            .checked_add_months(Months::new(months))
            .expect("date arithmetic overflow")
    }

    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.len() - 1)
    }

    pub fn first_year(&self) -> i32 {
        self.start.year()
    }

    pub fn last_year(&self) -> i32 {
        self.end_date().year()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> TimeSeries {
        TimeSeries {
            start: self.start,
            frequency: self.frequency,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<TimeSeries> {
        TimeSeries::new(self.start, self.frequency, values)
    }

    /// Reduces to annual frequency: one observation per calendar year, the
    /// last one recorded in that year. Annual series are returned unchanged.
    pub fn to_annual(&self) -> TimeSeries {
        match self.frequency {
            Frequency::Annual => self.clone(),
            Frequency::Monthly => {
                let mut values = Vec::new();
                let mut current_year = None;
                for (i, &v) in self.values.iter().enumerate() {
                    let year = self.date_at(i).year();
                    if current_year == Some(year) {
                        *values.last_mut().unwrap() = v;
                    } else {
                        values.push(v);
                        current_year = Some(year);
                    }
                }
                TimeSeries::annual(self.first_year(), values).expect("non-empty by construction")
            }
        }
    }

    /// Value for calendar `year` of an annual series.
    pub fn value_in_year(&self, year: i32) -> Option<f64> {
        debug_assert_eq!(self.frequency, Frequency::Annual);
        let offset = year - self.first_year();
        usize::try_from(offset).ok().and_then(|i| self.values.get(i).copied())
    }

    /// Annual sub-series covering `first..=last` (clipped to the data).
    pub fn years(&self, first: i32, last: i32) -> Option<TimeSeries> {
        let annual = self.to_annual();
        let lo = first.max(annual.first_year());
        let hi = last.min(annual.last_year());
        if lo > hi {
            return None;
        }
        let a = (lo - annual.first_year()) as usize;
        let b = (hi - annual.first_year()) as usize;
        TimeSeries::annual(lo, annual.values[a..=b].to_vec()).ok()
    }
}

/// Aligns two series on their common calendar years (after annual
/// reduction). Returns the first common year and the paired values.
pub fn align_annual(a: &TimeSeries, b: &TimeSeries) -> Result<(i32, Vec<f64>, Vec<f64>)> {
    let a = a.to_annual();
    let b = b.to_annual();
    let first = a.first_year().max(b.first_year());
    let last = a.last_year().min(b.last_year());
    if first > last {
        return Err(Error::NoOverlap);
    }
    let xs = a.years(first, last).ok_or(Error::NoOverlap)?;
    let ys = b.years(first, last).ok_or(Error::NoOverlap)?;
    Ok((first, xs.values, ys.values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Maturity {
    ThreeMonth,
    TenYear,
}

impl Maturity {
    pub fn years(self) -> f64 {
        match self {
            Maturity::ThreeMonth => 0.25,
            Maturity::TenYear => 10.0,
        }
    }
}

/// Real interest rate series (fraction per year, may be negative).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealRateSeries {
    pub base: TimeSeries,
    pub maturity: Maturity,
}

impl RealRateSeries {
    pub fn new(base: TimeSeries, maturity: Maturity) -> Self {
        RealRateSeries { base, maturity }
    }

    pub fn values(&self) -> &[f64] {
        self.base.values()
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }
}

/// Continuously compounded yield of a zero-coupon bond quoted as an annual
/// rate `beta`: `ln(1 + beta)`.
pub fn yield_from_annual_rate(beta: f64) -> Result<f64> {
    if !(beta > -1.0) {
        return Err(Error::domain(format!("annual rate {beta} must exceed -1")));
    }
    Ok(beta.ln_1p())
}

/// Forward `tau_years` average of log inflation starting at index `t` of an
/// annual CPI growth series (fractions).
pub fn inflation_rate(cpi_annual_growth: &TimeSeries, t: usize, tau_years: usize) -> Result<f64> {
    if tau_years == 0 {
        return Err(Error::domain("inflation window must be at least one year"));
    }
    let growth = cpi_annual_growth.values();
    let end = t + tau_years;
    if end > growth.len() {
        return Err(Error::OutOfBounds {
            start: t,
            end,
            len: growth.len(),
        });
    }
    let mut sum = 0.0;
    for &c in &growth[t..end] {
        if !(c > -1.0) {
            return Err(Error::domain(format!("CPI growth {c} must exceed -1")));
        }
        sum += c.ln_1p();
    }
    Ok(sum / tau_years as f64)
}

/// Fisher's relation: real = nominal - inflation.
pub fn fisher_real_rate(nominal: f64, inflation: f64) -> f64 {
    nominal - inflation
}

/// Fraction of strictly negative observations.
pub fn negative_fraction(series: &RealRateSeries) -> Result<f64> {
    negative_fraction_of(series.values())
}

pub fn negative_fraction_of(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("negative_fraction"));
    }
    let negatives = values.iter().filter(|&&v| v < 0.0).count();
    Ok(negatives as f64 / values.len() as f64)
}

/// Fixed-width histogram bins over `[lower, upper)`. Values outside the
/// range are folded into the first or last bin so the counts always add up
/// to the number of observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBins {
    pub lower: f64,
    pub upper: f64,
    pub width: f64,
}

impl Default for HistogramBins {
    /// One percentage point wide over [-15%, +15%].
    fn default() -> Self {
        HistogramBins {
            lower: -0.15,
            upper: 0.15,
            width: 0.01,
        }
    }
}

impl HistogramBins {
    pub fn bin_count(&self) -> usize {
        ((self.upper - self.lower) / self.width).round().max(1.0) as usize
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bin_count())
            .map(|i| self.lower + i as f64 * self.width)
            .collect()
    }

    pub fn bin_of(&self, x: f64) -> usize {
        let n = self.bin_count();
        let raw = ((x - self.lower) / self.width).floor();
        if raw < 0.0 {
            0
        } else {
            (raw as usize).min(n - 1)
        }
    }

    pub fn count(&self, values: &[f64]) -> Vec<u64> {
        let mut counts = vec![0u64; self.bin_count()];
        for &v in values {
            counts[self.bin_of(v)] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionStats {
    /// Share of dates with `ten_year - three_month < 0`. Ties are not inversions.
    pub fraction_inverted: f64,
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub spreads: Vec<f64>,
}

pub fn inversion_stats(
    three_month: &RealRateSeries,
    ten_year: &RealRateSeries,
    bins: &HistogramBins,
) -> Result<InversionStats> {
    let (_, short, long) = align_annual(&three_month.base, &ten_year.base)?;
    inversion_stats_of(&short, &long, bins)
}

/// Inversion statistics for already aligned series.
pub fn inversion_stats_of(three_month: &[f64], ten_year: &[f64], bins: &HistogramBins) -> Result<InversionStats> {
    if three_month.len() != ten_year.len() {
        return Err(Error::domain("aligned series differ in length"));
    }
    if three_month.is_empty() {
        return Err(Error::NoOverlap);
    }
    let spreads: Vec<f64> = ten_year.iter().zip(three_month).map(|(l, s)| l - s).collect();
    let inverted = spreads.iter().filter(|&&s| s < 0.0).count();
    Ok(InversionStats {
        fraction_inverted: inverted as f64 / spreads.len() as f64,
        bin_edges: bins.edges(),
        counts: bins.count(&spreads),
        spreads,
    })
}

/// Pearson correlation over the common calendar years of `a` and `b`.
pub fn series_correlation(a: &TimeSeries, b: &TimeSeries) -> Result<f64> {
    let (_, xs, ys) = align_annual(a, b)?;
    pearson(&xs, &ys)
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::domain("correlation inputs differ in length"));
    }
    if xs.len() < 3 {
        return Err(Error::TooShort {
            needed: 3,
            got: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant series"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(values: Vec<f64>) -> RealRateSeries {
        RealRateSeries::new(TimeSeries::annual(1900, values).unwrap(), Maturity::ThreeMonth)
    }

    #[test]
    fn annual_yield_examples() {
        assert_eq!(yield_from_annual_rate(0.0).unwrap(), 0.0);
        assert!((yield_from_annual_rate(0.05).unwrap() - 0.048_790_164_169_432).abs() < 1e-15);
        assert!((yield_from_annual_rate(-0.02).unwrap() + 0.020_202_707_317_519_45).abs() < 1e-15);
        assert!(yield_from_annual_rate(-1.0).is_err());
        assert!(yield_from_annual_rate(-1.5).is_err());
    }

    #[test]
    fn inflation_examples() {
        let flat = TimeSeries::annual(1900, vec![0.03; 20]).unwrap();
        for tau in [1, 5, 10] {
            let got = inflation_rate(&flat, 3, tau).unwrap();
            assert!((got - 0.029_558_802_241_544_4).abs() < 1e-15);
        }
        let zero = TimeSeries::annual(1900, vec![0.0]).unwrap();
        assert_eq!(inflation_rate(&zero, 0, 1).unwrap(), 0.0);

        let two = TimeSeries::annual(1900, vec![0.02, 0.04]).unwrap();
        // (ln 1.02 + ln 1.04) / 2 evaluated at 30 digits.
        assert!((inflation_rate(&two, 0, 2).unwrap() - 0.029_511_670_224_730_53).abs() < 1e-15);
    }

    #[test]
    fn inflation_errors() {
        let s = TimeSeries::annual(1900, vec![0.02, 0.04, 0.01]).unwrap();
        assert!(matches!(inflation_rate(&s, 2, 2), Err(Error::OutOfBounds { .. })));
        let bad = TimeSeries::annual(1900, vec![0.02, -1.0]).unwrap();
        assert!(matches!(inflation_rate(&bad, 0, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn fisher_examples() {
        assert!((fisher_real_rate(0.05, 0.03) - 0.02).abs() < 1e-17);
        assert!((fisher_real_rate(0.01, 0.04) + 0.03).abs() < 1e-17);
        assert_eq!(fisher_real_rate(0.0, 0.0), 0.0);
    }

    #[test]
    fn negative_fraction_examples() {
        assert_eq!(negative_fraction(&real(vec![0.01, 0.02, 0.03])).unwrap(), 0.0);
        assert_eq!(negative_fraction(&real(vec![-0.01, 0.01])).unwrap(), 0.5);
        // zeros are non-negative
        assert_eq!(negative_fraction(&real(vec![0.0, -0.0, -0.01])).unwrap(), 1.0 / 3.0);
        assert!(matches!(negative_fraction_of(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn inversion_examples() {
        let bins = HistogramBins::default();
        let a = real(vec![0.01, -0.02, 0.03]);
        let same = inversion_stats(&a, &a, &bins).unwrap();
        assert_eq!(same.fraction_inverted, 0.0);
        assert!(same.spreads.iter().all(|&s| s == 0.0));

        let short = real(vec![0.02]);
        let long = real(vec![0.01]);
        assert_eq!(inversion_stats(&short, &long, &bins).unwrap().fraction_inverted, 1.0);

        let late = RealRateSeries::new(TimeSeries::annual(2000, vec![0.01]).unwrap(), Maturity::TenYear);
        assert!(matches!(inversion_stats(&short, &late, &bins), Err(Error::NoOverlap)));
    }

    #[test]
    fn inversion_aligns_monthly_to_year_end() {
        let start = NaiveDate::from_ymd_opt(1900, 1, 31).unwrap();
        // 24 months: year-end values are 0.05 (Dec 1900) and 0.07 (Dec 1901).
        let mut monthly = vec![0.0; 24];
        monthly[11] = 0.05;
        monthly[23] = 0.07;
        let short = RealRateSeries::new(
            TimeSeries::new(start, Frequency::Monthly, monthly).unwrap(),
            Maturity::ThreeMonth,
        );
        let long = RealRateSeries::new(
            TimeSeries::annual(1899, vec![0.0, 0.06, 0.06, 0.06]).unwrap(),
            Maturity::TenYear,
        );
        let stats = inversion_stats(&short, &long, &HistogramBins::default()).unwrap();
        assert_eq!(stats.spreads.len(), 2);
        assert!((stats.spreads[0] - 0.01).abs() < 1e-15);
        assert!((stats.spreads[1] + 0.01).abs() < 1e-15);
        assert_eq!(stats.fraction_inverted, 0.5);
    }

    #[test]
    fn histogram_folds_tails() {
        let bins = HistogramBins::default();
        assert_eq!(bins.bin_count(), 30);
        let counts = bins.count(&[-1.0, -0.15, 0.0, 0.149, 0.5]);
        assert_eq!(counts.iter().sum::<u64>(), 5);
        assert_eq!(counts[0], 2);
        assert_eq!(counts[15], 1);
        assert_eq!(counts[29], 2);
    }

    #[test]
    fn correlation_examples() {
        let x = TimeSeries::annual(1900, vec![0.01, 0.03, -0.02, 0.05, 0.0]).unwrap();
        let neg = x.map(|v| -v);
        assert!((series_correlation(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((series_correlation(&x, &neg).unwrap() + 1.0).abs() < 1e-15);

        // Textbook fixture: x = 1..5, y = (2, 4, 5, 4, 5).
        // Sxy = 6, Sxx = 10, Syy = 6  =>  r = 6 / sqrt(60).
        let a = TimeSeries::annual(2000, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let b = TimeSeries::annual(2000, vec![2.0, 4.0, 5.0, 4.0, 5.0]).unwrap();
        let expected = 6.0 / 60f64.sqrt();
        assert!((series_correlation(&a, &b).unwrap() - expected).abs() < 1e-15);

        let flat = TimeSeries::annual(2000, vec![1.0; 5]).unwrap();
        assert!(matches!(
            series_correlation(&a, &flat),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn monthly_reduction_keeps_partial_final_year() {
        // Jan 1920 .. Oct 2012 is 93 calendar years.
        let start = NaiveDate::from_ymd_opt(1920, 1, 31).unwrap();
        let n = (2012 - 1920) * 12 + 10;
        let s = TimeSeries::new(start, Frequency::Monthly, (0..n).map(|i| i as f64).collect()).unwrap();
        let annual = s.to_annual();
        assert_eq!(annual.len(), 93);
        assert_eq!(annual.values()[0], 11.0);
        assert_eq!(*annual.values().last().unwrap(), (n - 1) as f64);
    }

    proptest! {
        #[test]
        fn fisher_round_trip(n in -0.5f64..0.5, i in -0.5f64..0.5) {
            // exact when |i| <= |n - i| or the subtraction is exact; verify
            // the defining relation to within one rounding of n
            let r = fisher_real_rate(n, i);
            prop_assert!((r + i - n).abs() <= f64::EPSILON * n.abs().max(i.abs()));
        }

        #[test]
        fn negative_fraction_scale_invariant(
            values in prop::collection::vec(-0.2f64..0.2, 1..60),
            scale in 1e-3f64..1e3,
        ) {
            let a = negative_fraction_of(&values).unwrap();
            let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
            prop_assert_eq!(a, negative_fraction_of(&scaled).unwrap());
        }

        #[test]
        fn inversion_fractions_partition(
            pairs in prop::collection::vec((-0.1f64..0.1, -0.1f64..0.1), 1..50),
        ) {
            let (s, l): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let st = inversion_stats_of(&s, &l, &HistogramBins::default()).unwrap();
            let not_inverted = st.spreads.iter().filter(|&&x| x >= 0.0).count() as f64 / s.len() as f64;
            prop_assert!((st.fraction_inverted + not_inverted - 1.0).abs() < 1e-15);
            prop_assert_eq!(st.counts.iter().sum::<u64>(), s.len() as u64);
        }

        #[test]
        fn inflation_constant_window_collapses(c in -0.5f64..0.5, tau in 1usize..15) {
            let s = TimeSeries::annual(1900, vec![c; 20]).unwrap();
            let got = inflation_rate(&s, 2, tau).unwrap();
            prop_assert!((got - c.ln_1p()).abs() <= 4.0 * f64::EPSILON * c.ln_1p().abs().max(1e-300));
        }
    }
}
