//! Daily water-level series: container, CSV ingestion, chronological
//! splitting, summary statistics and the seeded synthetic generator.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered daily observations (meters). Values are finite and nonempty;
/// the series is immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    start_date: NaiveDate,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, start_date: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("time series must contain at least one value".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "time series value at index {} is not finite",
                i + 1
            )));
        }
        Ok(Self {
            name: name.into(),
            start_date,
            values,
        })
    }

    /// Series with an arbitrary label and the default start date.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new("series", default_start_date(), values)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start_date(&self) -> NaiveDate {
        self.start_date
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

    /// Date of the 0-based observation `index`.
    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + Days::new(index as u64)
    }

    pub fn summary(&self) -> SummaryStats {
        summary_stats(&self.values)
    }
}

pub fn default_start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2007, 1, 1).expect("valid date")
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());
    read_csv(BufReader::new(file), name)
}

/// Parses `date,value` rows. Dates must advance by exactly one day.
pub fn read_csv<R: Read>(reader: R, name: impl Into<String>) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "date" || &headers[1] != "value" {
        return Err(Error::Ingestion {
            row: 1,
            message: format!("expected header `date,value`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut start: Option<NaiveDate> = None;
    let mut prev: Option<NaiveDate> = None;
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Ingestion {
            row,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Ingestion {
                row,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| Error::Ingestion {
            row,
            message: format!("invalid date `{}`: {e}", &record[0]),
        })?;
        if let Some(p) = prev {
            let expected = p + Days::new(1);
            if date == p {
                return Err(Error::Ingestion {
                    row,
                    message: format!("duplicate date {date}"),
                });
            }
            if date != expected {
                return Err(Error::Ingestion {
                    row,
                    message: format!("non-consecutive date {date}, expected {expected}"),
                });
            }
        }
        let value: f64 = record[1].parse().map_err(|_| Error::Ingestion {
            row,
            message: format!("non-numeric value `{}`", &record[1]),
        })?;
        if !value.is_finite() {
            return Err(Error::Ingestion {
                row,
                message: format!("non-finite value `{}`", &record[1]),
            });
        }
        start.get_or_insert(date);
        prev = Some(date);
        values.push(value);
    }

    let start = start.ok_or_else(|| Error::IngestionFile("file contains no data rows".into()))?;
    TimeSeries::new(name, start, values)
}

pub fn save_csv(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv(series, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `date,value` rows. Values use Rust's shortest round-trip float
/// formatting, so reading the file back yields identical values.
pub fn write_csv<W: Write>(series: &TimeSeries, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "date,value")?;
    for (i, v) in series.values.iter().enumerate() {
        writeln!(w, "{},{}", series.date_at(i).format("%Y-%m-%d"), v)?;
    }
    Ok(())
}

/// Fractions of a chronological three-way split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub calib_frac: f64,
    pub test_frac: f64,
    pub valid_frac: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            calib_frac: 0.6,
            test_frac: 0.2,
            valid_frac: 0.2,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fracs = [self.calib_frac, self.test_frac, self.valid_frac];
        if fracs.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(Error::Split(format!("split fractions must be positive, got {fracs:?}")));
        }
        let total: f64 = fracs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Split(format!("split fractions must sum to 1, got {total}")));
        }
        Ok(())
    }
}

/// The three periods as 1-based inclusive index ranges over `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRanges {
    pub calibration: RangeInclusive<usize>,
    pub test: RangeInclusive<usize>,
    pub validation: RangeInclusive<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Calibration,
    Test,
    Validation,
}

impl Period {
    pub const ALL: [Period; 3] = [Period::Calibration, Period::Test, Period::Validation];

    pub fn as_str(self) -> &'static str {
        match self {
            Period::Calibration => "calibration",
            Period::Test => "test",
            Period::Validation => "validation",
        }
    }
}

impl SplitRanges {
    pub fn range(&self, period: Period) -> &RangeInclusive<usize> {
        match period {
            Period::Calibration => &self.calibration,
            Period::Test => &self.test,
            Period::Validation => &self.validation,
        }
    }

    /// Period containing the 1-based time index `t`.
    pub fn period_of(&self, t: usize) -> Option<Period> {
        Period::ALL.into_iter().find(|p| self.range(*p).contains(&t))
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        let len = |r: &RangeInclusive<usize>| r.end() + 1 - r.start();
        (len(&self.calibration), len(&self.test), len(&self.validation))
    }
}

/// Splits `1..=N` at `floor(0.6·N)` and `floor(0.8·N)` (for the default fractions).
pub fn split_chronological(series: &TimeSeries, spec: &SplitSpec) -> Result<SplitRanges> {
    split_len(series.len(), spec)
}

pub fn split_len(n: usize, spec: &SplitSpec) -> Result<SplitRanges> {
    spec.validate()?;
    // The epsilon absorbs representation error in sums like 0.6 + 0.2.
    let boundary = |frac: f64| (frac * n as f64 + 1e-9).floor() as usize;
    let c = boundary(spec.calib_frac);
    let d = boundary(spec.calib_frac + spec.test_frac).min(n);
    if c == 0 {
        return Err(Error::Split(format!("calibration partition is empty for N={n}")));
    }
    if d <= c {
        return Err(Error::Split(format!("test partition is empty for N={n}")));
    }
    if d >= n {
        return Err(Error::Split(format!("validation partition is empty for N={n}")));
    }
    Ok(SplitRanges {
        calibration: 1..=c,
        test: c + 1..=d,
        validation: d + 1..=n,
    })
}

/// Sample statistics; `std` uses the population (1/N) convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

pub fn summary_stats(values: &[f64]) -> SummaryStats {
    assert!(!values.is_empty(), "summary_stats needs at least one value");
    let n = values.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    SummaryStats {
        min,
        max,
        mean,
        std: var.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonalTerm {
    pub period_days: f64,
    pub amplitude: f64,
    /// Phase offset in radians.
    #[serde(default)]
    pub phase: f64,
}

/// Parameters of the synthetic water-level generator:
/// `base + slope·t + Σ seasonal + AR(1) noise + decaying flood pulses`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub length: usize,
    pub base_level: f64,
    pub trend_slope: f64,
    pub seasonal: Vec<SeasonalTerm>,
    pub ar_coefficient: f64,
    pub noise_std: f64,
    /// Expected number of flood pulses per day.
    pub pulse_rate: f64,
    pub pulse_height: f64,
    /// e-folding recession time of a pulse.
    pub pulse_decay_days: f64,
    pub seed: u64,
}

pub const PRESET_NAMES: [&str; 3] = ["guoyang-like", "chaohu-like", "taoxi-like"];

impl SyntheticSpec {
    /// Named presets loosely matching three gauging regimes: a regulated
    /// upstream gate level, a periodic lake level, and a flashy river.
    pub fn preset(name: &str, seed: u64) -> Result<Self> {
        let spec = match name {
            "guoyang-like" => Self {
                length: 3653,
                base_level: 28.45,
                trend_slope: 0.0,
                seasonal: vec![
                    SeasonalTerm { period_days: 365.25, amplitude: 0.22, phase: 0.4 },
                    SeasonalTerm { period_days: 182.625, amplitude: 0.08, phase: 1.1 },
                ],
                ar_coefficient: 0.97,
                noise_std: 0.025,
                pulse_rate: 0.008,
                pulse_height: 0.45,
                pulse_decay_days: 6.0,
                seed,
            },
            "chaohu-like" => Self {
                length: 3653,
                base_level: 8.62,
                trend_slope: 0.0,
                seasonal: vec![
                    SeasonalTerm { period_days: 365.25, amplitude: 0.45, phase: -1.3 },
                    SeasonalTerm { period_days: 182.625, amplitude: 0.12, phase: 0.3 },
                ],
                ar_coefficient: 0.985,
                noise_std: 0.03,
                pulse_rate: 0.006,
                pulse_height: 0.9,
                pulse_decay_days: 25.0,
                seed,
            },
            "taoxi-like" => Self {
                length: 3653,
                base_level: 8.9,
                trend_slope: 0.0,
                seasonal: vec![SeasonalTerm { period_days: 365.25, amplitude: 0.55, phase: -1.0 }],
                ar_coefficient: 0.9,
                noise_std: 0.12,
                pulse_rate: 0.02,
                pulse_height: 1.8,
                pulse_decay_days: 4.0,
                seed,
            },
            other => {
                return Err(Error::Validation(format!(
                    "unknown synthetic preset `{other}` (expected one of {})",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Validation("synthetic length must be positive".into()));
        }
        if !(self.ar_coefficient.abs() < 1.0) {
            return Err(Error::Validation("|ar_coefficient| must be < 1".into()));
        }
        if !(self.noise_std >= 0.0) || !(self.pulse_rate >= 0.0) || self.pulse_rate > 1.0 {
            return Err(Error::Validation("noise_std must be >= 0 and pulse_rate in [0, 1]".into()));
        }
        if !(self.pulse_decay_days > 0.0) {
            return Err(Error::Validation("pulse_decay_days must be positive".into()));
        }
        if self.seasonal.iter().any(|s| !(s.period_days > 0.0)) {
            return Err(Error::Validation("seasonal period_days must be positive".into()));
        }
        let all_finite = [self.base_level, self.trend_slope, self.pulse_height]
            .into_iter()
            .chain(self.seasonal.iter().flat_map(|s| [s.amplitude, s.phase]))
            .all(f64::is_finite);
        if !all_finite {
            return Err(Error::Validation("synthetic parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Deterministic in `spec`: the same spec always yields bit-identical values.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let decay = (-1.0 / spec.pulse_decay_days).exp();
    let mut ar = 0.0;
    let mut flood = 0.0;
    let mut values = Vec::with_capacity(spec.length);
    for t in 0..spec.length {
        // Three draws per step keep the random stream aligned whatever the parameters.
        let eps: f64 = rng.sample(StandardNormal);
        let trigger: f64 = rng.random();
        let size: f64 = rng.random();

        ar = spec.ar_coefficient * ar + spec.noise_std * eps;
        flood *= decay;
        if trigger < spec.pulse_rate {
            flood += spec.pulse_height * (0.5 + size);
        }
        let tf = t as f64;
        let seasonal: f64 = spec
            .seasonal
            .iter()
            .map(|s| s.amplitude * (std::f64::consts::TAU * tf / s.period_days + s.phase).sin())
            .sum();
        values.push(spec.base_level + spec.trend_slope * tf + seasonal + ar + flood);
    }
    TimeSeries::new(format!("synthetic-{}", spec.seed), default_start_date(), values)
}
