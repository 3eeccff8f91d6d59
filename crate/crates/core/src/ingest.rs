//! CSV loading and preparation of the annual real-rate series.
//!
//! Input files are UTF-8 CSV with a header row. Dates are either a bare year
//! (`1950`), a month (`1950-03`) or a full ISO date (`1950-03-31`). Rates
//! and CPI growth are given in percent; CPI may instead be an index level.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ratecore::{self, Frequency, Maturity, RealRateSeries, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    AnnualRatePercent,
    MonthlyRatePercent,
    CpiGrowthPercent,
    CpiIndexLevel,
    /// Annual values already expressed as fractions, such as prepared real
    /// rates written back to disk.
    AnnualFraction,
}

impl SeriesKind {
    pub fn frequency(self) -> Frequency {
        match self {
            SeriesKind::MonthlyRatePercent => Frequency::Monthly,
            _ => Frequency::Annual,
        }
    }

    fn is_percent(self) -> bool {
        !matches!(self, SeriesKind::CpiIndexLevel | SeriesKind::AnnualFraction)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSeriesFile {
    pub path: PathBuf,
    pub kind: SeriesKind,
    pub date_column: String,
    pub value_column: String,
}

impl RawSeriesFile {
    /// A file with columns named `date` and `value`.
    pub fn new(path: impl Into<PathBuf>, kind: SeriesKind) -> Self {
        RawSeriesFile {
            path: path.into(),
            kind,
            date_column: "date".into(),
            value_column: "value".into(),
        }
    }
}

/// Observation counts reported for a loaded file. Monthly files are also
/// counted in calendar years, the unit historical tables often use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub observations: usize,
    pub calendar_years: usize,
}

fn parse_date(text: &str) -> Option<(NaiveDate, bool)> {
    let text = text.trim();
    let parts: Vec<&str> = text.split('-').collect();
    let year: i32 = match parts[0] {
        y if y.len() == 4 && y.bytes().all(|b| b.is_ascii_digit()) => y.parse().ok()?,
        _ => return None,
    };
    match parts.len() {
        1 => NaiveDate::from_ymd_opt(year, 12, 31).map(|d| (d, true)),
        2 => {
            let month: u32 = parts[1].parse().ok()?;
            NaiveDate::from_ymd_opt(year, month, 1).map(|d| (d, false))
        }
        3 => NaiveDate::parse_from_str(text, "%Y-%m-%d").ok().map(|d| (d, false)),
        _ => None,
    }
}

fn label(key: i64, frequency: Frequency) -> String {
    match frequency {
        Frequency::Annual => key.to_string(),
        Frequency::Monthly => format!("{}-{:02}", key.div_euclid(12), key.rem_euclid(12) + 1),
    }
}

fn period_key(date: NaiveDate, frequency: Frequency) -> i64 {
    match frequency {
        Frequency::Annual => date.year() as i64,
        Frequency::Monthly => date.year() as i64 * 12 + date.month0() as i64,
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hex SHA-256 digest of a file's contents.
pub fn file_sha256(path: &Path) -> Result<String> {
    Ok(sha256_hex(&read_file(path)?))
}

/// Loads one series. Percent kinds are converted to fractions.
pub fn load_csv(file: &RawSeriesFile) -> Result<TimeSeries> {
    Ok(load_csv_with_summary(file)?.0)
}

pub fn load_csv_with_summary(file: &RawSeriesFile) -> Result<(TimeSeries, LoadSummary)> {
    let bytes = read_file(&file.path)?;
    parse_csv(&file.path, &bytes, file)
}

fn parse_csv(path: &Path, bytes: &[u8], file: &RawSeriesFile) -> Result<(TimeSeries, LoadSummary)> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing column '{name}'")))
    };
    let date_col = column(&file.date_column)?;
    let value_col = column(&file.value_column)?;
    let frequency = file.kind.frequency();
    let scale = if file.kind.is_percent() { 0.01 } else { 1.0 };

    let mut start = None;
    let mut keys: Vec<i64> = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let date_text = record.get(date_col).unwrap_or("");
        let (date, year_only) =
            parse_date(date_text).ok_or_else(|| parse_err(line, format!("unparseable date '{date_text}'")))?;
        if year_only && frequency == Frequency::Monthly {
            return Err(parse_err(
                line,
                format!("monthly series needs a month in '{date_text}'"),
            ));
        }
        let value_text = record.get(value_col).unwrap_or("");
        let value: f64 = value_text
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(line, format!("unparseable value '{value_text}'")))?;

        let key = period_key(date, frequency);
        if let Some(&prev) = keys.last() {
            if key == prev {
                return Err(Error::DuplicateDate {
                    path: path.to_path_buf(),
                    date: label(key, frequency),
                });
            }
            if key < prev {
                return Err(Error::Unordered {
                    path: path.to_path_buf(),
                    date: label(key, frequency),
                });
            }
        } else {
            start = Some(match frequency {
                Frequency::Annual => NaiveDate::from_ymd_opt(date.year(), 12, 31).unwrap(),
                Frequency::Monthly => date.with_day(1).unwrap(),
            });
        }
        keys.push(key);
        values.push(value * scale);
    }
    let start = start.ok_or(Error::EmptyInput("CSV file has no data rows"))?;

    let missing: Vec<String> = keys
        .windows(2)
        .flat_map(|w| (w[0] + 1..w[1]).map(|k| label(k, frequency)))
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingDates {
            path: path.to_path_buf(),
            dates: missing,
        });
    }
    let series = TimeSeries::new(start, frequency, values)?;
    let summary = LoadSummary {
        observations: series.len(),
        calendar_years: (series.last_year() - series.first_year() + 1) as usize,
    };
    Ok((series, summary))
}

/// CPI input in either accepted representation.
#[derive(Debug, Clone, PartialEq)]
pub enum CpiSeries {
    /// Annual growth as a fraction, `C(t)` for calendar year `t`.
    Growth(TimeSeries),
    /// Index level at each year end.
    IndexLevel(TimeSeries),
}

impl CpiSeries {
    /// Annual growth `C(t) = I(t+1) / I(t) - 1`, keyed by the year it starts.
    pub fn growth(&self) -> Result<TimeSeries> {
        match self {
            CpiSeries::Growth(g) => Ok(g.to_annual()),
            CpiSeries::IndexLevel(level) => {
                let level = level.to_annual();
                let v = level.values();
                if v.len() < 2 {
                    return Err(Error::TooShort {
                        needed: 2,
                        got: v.len(),
                    });
                }
                if let Some(bad) = v.iter().find(|&&x| !(x > 0.0)) {
                    return Err(Error::domain(format!("CPI index level {bad} must be positive")));
                }
                let growth = v.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
                TimeSeries::annual(level.first_year(), growth)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepareOptions {
    /// Forward inflation window for the long real rate.
    pub long_window_years: usize,
    /// Minimum length of each real series.
    pub min_years: usize,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            long_window_years: 10,
            min_years: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub role: String,
    pub path: PathBuf,
    pub kind: SeriesKind,
    pub date_column: String,
    pub value_column: String,
    pub sha256: String,
    pub summary: LoadSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub operation: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: Vec<InputRecord>,
    pub options: Option<PrepareOptions>,
    pub steps: Vec<Step>,
    pub warnings: Vec<String>,
}

impl Provenance {
    fn step(&mut self, operation: &str, detail: impl Into<String>) {
        self.steps.push(Step {
            operation: operation.into(),
            detail: detail.into(),
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDataset {
    pub three_month_real: RealRateSeries,
    pub ten_year_real: RealRateSeries,
    /// Continuously compounded nominal yields `ln(1 + beta)`, annual.
    pub nominal_3m: TimeSeries,
    pub nominal_10y: TimeSeries,
    /// Annual log inflation `ln(1 + C(t))`.
    pub inflation_annual: TimeSeries,
    pub provenance: Provenance,
}

fn log_yields(series: &TimeSeries) -> Result<TimeSeries> {
    let values = series
        .values()
        .iter()
        .map(|&b| ratecore::yield_from_annual_rate(b))
        .collect::<Result<Vec<_>>>()?;
    series.with_values(values)
}

fn range_text(s: &TimeSeries) -> String {
    format!("{}..={} ({} values)", s.first_year(), s.last_year(), s.len())
}

/// Builds the annual real-rate series from nominal rates (fractions, not
/// yet log-transformed) and CPI.
///
/// The 3-month real rate for year `t` is `ln(1 + beta_3m(t)) - ln(1 + C(t))`.
/// The 10-year real rate is `ln(1 + beta_10y(t))` minus the average log
/// inflation over `t..t+10`, so it ends 10 years before the CPI data does.
/// Monthly series are sampled at year end first.
pub fn prepare_dataset(
    nominal_3m: &TimeSeries,
    nominal_10y: &TimeSeries,
    cpi: &CpiSeries,
    opts: &PrepareOptions,
) -> Result<PreparedDataset> {
    prepare_with_provenance(nominal_3m, nominal_10y, cpi, opts, Provenance::default())
}

fn prepare_with_provenance(
    nominal_3m: &TimeSeries,
    nominal_10y: &TimeSeries,
    cpi: &CpiSeries,
    opts: &PrepareOptions,
    mut prov: Provenance,
) -> Result<PreparedDataset> {
    if opts.long_window_years == 0 {
        return Err(Error::InvalidConfig("long_window_years must be >= 1".into()));
    }
    prov.options = Some(*opts);

    let n3 = nominal_3m.to_annual();
    if nominal_3m.frequency() == Frequency::Monthly {
        prov.step(
            "year_end_sample",
            format!("nominal_3m: {} monthly -> {}", nominal_3m.len(), range_text(&n3)),
        );
    }
    let n10 = nominal_10y.to_annual();
    if nominal_10y.frequency() == Frequency::Monthly {
        prov.step(
            "year_end_sample",
            format!("nominal_10y: {} monthly -> {}", nominal_10y.len(), range_text(&n10)),
        );
    }
    let y3 = log_yields(&n3)?;
    let y10 = log_yields(&n10)?;
    prov.step("log_yield", "y = ln(1 + beta) for nominal_3m and nominal_10y");

    let growth = cpi.growth()?;
    if matches!(cpi, CpiSeries::IndexLevel(_)) {
        prov.step(
            "cpi_index_to_growth",
            format!("C(t) = I(t+1)/I(t) - 1 -> {}", range_text(&growth)),
        );
    }
    let log_infl = growth
        .values()
        .iter()
        .map(|&c| {
            if c > -1.0 {
                Ok(c.ln_1p())
            } else {
                Err(Error::domain(format!("CPI growth {c} must exceed -1")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let inflation_annual = growth.with_values(log_infl)?;
    prov.step("log_inflation", "i(t) = ln(1 + C(t))");

    // 3-month: same-year inflation
    let first = y3.first_year().max(growth.first_year());
    let last = y3.last_year().min(growth.last_year());
    let available = (last - first + 1).max(0) as usize;
    if available < opts.min_years {
        return Err(Error::InsufficientOverlap {
            what: "3-month rates and CPI",
            required: opts.min_years,
            available,
        });
    }
    let real3: Vec<f64> = (first..=last)
        .map(|y| ratecore::fisher_real_rate(y3.value_in_year(y).unwrap(), inflation_annual.value_in_year(y).unwrap()))
        .collect();
    let three = TimeSeries::annual(first, real3)?;
    prov.step("real_3m", format!("y_3m(t) - i(t) over {}", range_text(&three)));

    // 10-year: forward window average, truncated at the end of the CPI data
    let w = opts.long_window_years as i32;
    let first = y10.first_year().max(growth.first_year());
    let last = y10.last_year().min(growth.last_year() - w + 1);
    let available = (last - first + 1).max(0) as usize;
    if available < opts.min_years {
        return Err(Error::InsufficientOverlap {
            what: "10-year rates and the forward CPI window",
            required: opts.min_years,
            available,
        });
    }
    let real10 = (first..=last)
        .map(|y| {
            let idx = (y - growth.first_year()) as usize;
            let infl = ratecore::inflation_rate(&growth, idx, opts.long_window_years)?;
            Ok(ratecore::fisher_real_rate(y10.value_in_year(y).unwrap(), infl))
        })
        .collect::<Result<Vec<_>>>()?;
    let ten = TimeSeries::annual(first, real10)?;
    prov.step(
        "real_10y",
        format!("y_10y(t) - mean(i(t..t+{w})) over {}", range_text(&ten)),
    );

    for (name, s) in [("3-month", &three), ("10-year", &ten)] {
        let outside = s.values().iter().filter(|v| !(v.abs() < 1.0)).count();
        if outside > 0 {
            let msg =
                format!("{outside} {name} real rates lie outside (-1, 1) per year; check percent vs fraction units");
            log::warn!("{msg}");
            prov.warnings.push(msg);
        }
    }

    Ok(PreparedDataset {
        three_month_real: RealRateSeries::new(three, Maturity::ThreeMonth),
        ten_year_real: RealRateSeries::new(ten, Maturity::TenYear),
        nominal_3m: y3,
        nominal_10y: y10,
        inflation_annual,
        provenance: prov,
    })
}

/// The three input files of a preparation run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFiles {
    pub nominal_3m: RawSeriesFile,
    pub nominal_10y: RawSeriesFile,
    pub cpi: RawSeriesFile,
}

fn load_role(role: &str, file: &RawSeriesFile, prov: &mut Provenance) -> Result<TimeSeries> {
    let bytes = read_file(&file.path)?;
    let (series, summary) = parse_csv(&file.path, &bytes, file)?;
    prov.inputs.push(InputRecord {
        role: role.into(),
        path: file.path.clone(),
        kind: file.kind,
        date_column: file.date_column.clone(),
        value_column: file.value_column.clone(),
        sha256: sha256_hex(&bytes),
        summary,
    });
    prov.step(
        "load",
        format!(
            "{role}: {} observations over {} calendar years",
            summary.observations, summary.calendar_years
        ),
    );
    Ok(series)
}

/// Loads the three files and prepares the dataset, recording digests and
/// every transformation in the provenance.
pub fn prepare_from_files(files: &DatasetFiles, opts: &PrepareOptions) -> Result<PreparedDataset> {
    for (role, f, allowed) in [
        (
            "nominal_3m",
            &files.nominal_3m,
            [SeriesKind::AnnualRatePercent, SeriesKind::MonthlyRatePercent],
        ),
        (
            "nominal_10y",
            &files.nominal_10y,
            [SeriesKind::AnnualRatePercent, SeriesKind::MonthlyRatePercent],
        ),
        (
            "cpi",
            &files.cpi,
            [SeriesKind::CpiGrowthPercent, SeriesKind::CpiIndexLevel],
        ),
    ] {
        if !allowed.contains(&f.kind) {
            return Err(Error::InvalidConfig(format!("{role} cannot be of kind {:?}", f.kind)));
        }
    }
    let mut prov = Provenance::default();
    let n3 = load_role("nominal_3m", &files.nominal_3m, &mut prov)?;
    let n10 = load_role("nominal_10y", &files.nominal_10y, &mut prov)?;
    let raw_cpi = load_role("cpi", &files.cpi, &mut prov)?;
    let cpi = match files.cpi.kind {
        SeriesKind::CpiIndexLevel => CpiSeries::IndexLevel(raw_cpi),
        _ => CpiSeries::Growth(raw_cpi),
    };
    prepare_with_provenance(&n3, &n10, &cpi, opts, prov)
}

/// Re-runs a preparation from its provenance, checking that every input
/// file still has the recorded digest.
pub fn replay(prov: &Provenance) -> Result<PreparedDataset> {
    let find = |role: &str| {
        prov.inputs
            .iter()
            .find(|i| i.role == role)
            .ok_or_else(|| Error::InvalidConfig(format!("provenance has no '{role}' input")))
    };
    let mut files = Vec::new();
    for role in ["nominal_3m", "nominal_10y", "cpi"] {
        let rec = find(role)?;
        let digest = sha256_hex(&read_file(&rec.path)?);
        if digest != rec.sha256 {
            return Err(Error::InvalidConfig(format!(
                "{} changed since preparation (sha256 {digest}, recorded {})",
                rec.path.display(),
                rec.sha256
            )));
        }
        files.push(RawSeriesFile {
            path: rec.path.clone(),
            kind: rec.kind,
            date_column: rec.date_column.clone(),
            value_column: rec.value_column.clone(),
        });
    }
    let cpi = files.pop().unwrap();
    let nominal_10y = files.pop().unwrap();
    let nominal_3m = files.pop().unwrap();
    let opts = prov.options.unwrap_or_default();
    prepare_from_files(
        &DatasetFiles {
            nominal_3m,
            nominal_10y,
            cpi,
        },
        &opts,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        fs::File::create(&path).unwrap().write_all(body.as_bytes()).unwrap();
        path
    }

    fn annual_csv(first: i32, values: impl IntoIterator<Item = f64>) -> String {
        let mut s = String::from("date,value\n");
        for (i, v) in values.into_iter().enumerate() {
            s.push_str(&format!("{},{}\n", first + i as i32, v));
        }
        s
    }

    #[test]
    fn percent_conversion() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "date,value\n1900,5.0\n1901,4.0\n");
        let s = load_csv(&RawSeriesFile::new(&p, SeriesKind::AnnualRatePercent)).unwrap();
        assert_eq!(s.values(), &[0.05, 0.04]);
        assert_eq!(s.first_year(), 1900);
        let lvl = load_csv(&RawSeriesFile::new(&p, SeriesKind::CpiIndexLevel)).unwrap();
        assert_eq!(lvl.values(), &[5.0, 4.0]);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let kind = SeriesKind::AnnualRatePercent;
        let dup = write(dir.path(), "dup.csv", "date,value\n1900,1\n1900,2\n");
        assert!(matches!(
            load_csv(&RawSeriesFile::new(&dup, kind)),
            Err(Error::DuplicateDate { .. })
        ));
        let back = write(dir.path(), "back.csv", "date,value\n1901,1\n1900,2\n");
        assert!(matches!(
            load_csv(&RawSeriesFile::new(&back, kind)),
            Err(Error::Unordered { .. })
        ));
        let gap = write(dir.path(), "gap.csv", "date,value\n1900,1\n1903,2\n1904,1\n");
        match load_csv(&RawSeriesFile::new(&gap, kind)) {
            Err(Error::MissingDates { dates, .. }) => assert_eq!(dates, ["1901", "1902"]),
            other => panic!("{other:?}"),
        }
        let bad = write(dir.path(), "bad.csv", "date,value\n1900,1\n1901,x\n");
        match load_csv(&RawSeriesFile::new(&bad, kind)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let nodate = write(dir.path(), "nodate.csv", "date,value\n19x0,1\n");
        assert!(matches!(
            load_csv(&RawSeriesFile::new(&nodate, kind)),
            Err(Error::Parse { line: 2, .. })
        ));
        let col = write(dir.path(), "col.csv", "year,value\n1900,1\n");
        assert!(matches!(
            load_csv(&RawSeriesFile::new(&col, kind)),
            Err(Error::Parse { .. })
        ));
        let missing = dir.path().join("nope.csv");
        assert!(matches!(
            load_csv(&RawSeriesFile::new(&missing, kind)),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn monthly_counts() {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::from("date,value\n");
        for y in 1900..1993 {
            for m in 1..=12 {
                body.push_str(&format!("{y}-{m:02}-15,4.0\n"));
            }
        }
        let p = write(dir.path(), "m.csv", &body);
        let (s, summary) = load_csv_with_summary(&RawSeriesFile::new(&p, SeriesKind::MonthlyRatePercent)).unwrap();
        assert_eq!(s.len(), 1116);
        assert_eq!(summary.calendar_years, 93);
        body.push_str("1993-01-15,4.0\n");
        let p = write(dir.path(), "m2.csv", &body);
        let (s, summary) = load_csv_with_summary(&RawSeriesFile::new(&p, SeriesKind::MonthlyRatePercent)).unwrap();
        assert_eq!(s.len(), 1117);
        assert_eq!(summary.calendar_years, 94);
        assert_eq!(s.to_annual().len(), 94);

        let gap = write(dir.path(), "g.csv", "date,value\n1900-01,1\n1900-02,1\n1900-04,1\n");
        match load_csv(&RawSeriesFile::new(&gap, SeriesKind::MonthlyRatePercent)) {
            Err(Error::MissingDates { dates, .. }) => assert_eq!(dates, ["1900-03"]),
            other => panic!("{other:?}"),
        }
    }

    fn flat(first: i32, n: usize, v: f64) -> TimeSeries {
        TimeSeries::annual(first, vec![v; n]).unwrap()
    }

    #[test]
    fn flat_rates() {
        let d = prepare_dataset(
            &flat(1900, 60, 0.05),
            &flat(1900, 60, 0.05),
            &CpiSeries::Growth(flat(1900, 60, 0.03)),
            &PrepareOptions::default(),
        )
        .unwrap();
        let want = 1.05f64.ln() - 1.03f64.ln();
        assert!((want - 0.019231).abs() < 5e-7);
        assert_eq!(d.three_month_real.len(), 60);
        assert_eq!(d.ten_year_real.len(), 51);
        for v in d.three_month_real.values().iter().chain(d.ten_year_real.values()) {
            assert!((v - want).abs() < 1e-15);
        }
        assert!(d.ten_year_real.base.end_date().year() <= d.inflation_annual.end_date().year() - 9);
    }

    #[test]
    fn zero_inflation_and_long_cpi() {
        let n3 = TimeSeries::annual(1950, (0..40).map(|i| 0.01 * (i % 7) as f64).collect()).unwrap();
        let d = prepare_dataset(
            &n3,
            &n3,
            &CpiSeries::Growth(flat(1940, 70, 0.0)),
            &PrepareOptions::default(),
        )
        .unwrap();
        // CPI extends 10+ years past the bonds, so both real series cover them
        assert_eq!(d.ten_year_real.len(), 40);
        assert_eq!(d.ten_year_real.base.first_year(), 1950);
        for (a, b) in d.three_month_real.values().iter().zip(d.nominal_3m.values()) {
            assert_eq!(a, b);
        }
        assert_eq!(d.ten_year_real.values(), d.nominal_10y.values());
    }

    #[test]
    fn index_levels_and_overlap() {
        // index growing 3% a year gives the same result as 3% growth
        let level = TimeSeries::annual(1900, (0..61).map(|i| 100.0 * 1.03f64.powi(i)).collect()).unwrap();
        let a = prepare_dataset(
            &flat(1900, 60, 0.05),
            &flat(1900, 60, 0.05),
            &CpiSeries::IndexLevel(level),
            &PrepareOptions::default(),
        )
        .unwrap();
        for v in a.three_month_real.values() {
            assert!((v - (1.05f64.ln() - 1.03f64.ln())).abs() < 1e-14);
        }
        let short = prepare_dataset(
            &flat(1900, 35, 0.05),
            &flat(1900, 35, 0.05),
            &CpiSeries::Growth(flat(1900, 35, 0.03)),
            &PrepareOptions::default(),
        );
        match short {
            Err(Error::InsufficientOverlap {
                required, available, ..
            }) => {
                assert_eq!((required, available), (30, 26));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_warning() {
        let d = prepare_dataset(
            &flat(1900, 60, 5.0),
            &flat(1900, 60, 0.05),
            &CpiSeries::Growth(flat(1900, 60, 0.0)),
            &PrepareOptions::default(),
        )
        .unwrap();
        assert_eq!(d.provenance.warnings.len(), 1);
    }

    #[test]
    fn provenance_replays() {
        let dir = tempfile::tempdir().unwrap();
        let rates = (0..50).map(|i| 3.0 + (i as f64 * 0.7).sin());
        let files = DatasetFiles {
            nominal_3m: RawSeriesFile::new(
                write(dir.path(), "n3.csv", &annual_csv(1900, rates.clone())),
                SeriesKind::AnnualRatePercent,
            ),
            nominal_10y: RawSeriesFile::new(
                write(dir.path(), "n10.csv", &annual_csv(1900, rates.map(|r| r + 1.0))),
                SeriesKind::AnnualRatePercent,
            ),
            cpi: RawSeriesFile::new(
                write(
                    dir.path(),
                    "cpi.csv",
                    &annual_csv(1900, (0..50).map(|i| 2.0 + (i as f64 * 1.3).cos())),
                ),
                SeriesKind::CpiGrowthPercent,
            ),
        };
        let d = prepare_from_files(&files, &PrepareOptions::default()).unwrap();
        assert_eq!(d.provenance.inputs.len(), 3);
        assert_eq!(d.provenance.inputs[0].sha256.len(), 64);
        let again = replay(&d.provenance).unwrap();
        assert_eq!(again, d);

        fs::write(&files.cpi.path, "date,value\n1900,1\n").unwrap();
        assert!(replay(&d.provenance).is_err());
    }
}
