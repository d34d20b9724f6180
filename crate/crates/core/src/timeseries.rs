//! Price ingestion, returns, normalization, volatility and surrogates.
//!
//! Time indices `t'` in this module's public API are 1-based: the first
//! return of a series is `r(1)`, matching the indexing used by the window
//! averages in [`crate::nonlocal`].

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceFormat {
    /// `YYYY-MM-DD,<close>` rows with an optional `date,close` header.
    TwoColumn,
    /// Yahoo! Finance daily export; only `Date` and `Close` are read.
    YahooCsv,
}

impl FromStr for PriceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "two_column" | "two-column" | "twocolumn" | "csv" => Ok(Self::TwoColumn),
            "yahoo" | "yahoo_csv" | "yahoo-csv" => Ok(Self::YahooCsv),
            other => Err(Error::InvalidParameter(format!("unknown price format {other:?}"))),
        }
    }
}

/// Daily closing prices, strictly increasing in date.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    symbol: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    /// Builds a series from unsorted rows, validating the invariants.
    pub fn new(symbol: impl Into<String>, rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let mut by_date = BTreeMap::new();
        for (row, (date, close)) in rows.into_iter().enumerate() {
            if !(close > 0.0) || !close.is_finite() {
                return Err(Error::BadRow {
                    row: row as u64 + 1,
                    reason: format!("non-positive price {close}"),
                });
            }
            if by_date.insert(date, close).is_some() {
                return Err(Error::DuplicateDate(date.to_string()));
            }
        }
        if by_date.len() < 2 {
            return Err(Error::TooShort {
                needed: 2,
                got: by_date.len(),
            });
        }
        let (dates, closes) = by_date.into_iter().unzip();
        Ok(Self {
            symbol: symbol.into(),
            dates,
            closes,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

/// Parses a CSV price file. Rows may arrive in any order; the result is
/// sorted by date.
pub fn load_price_series<R: Read>(
    source: R,
    format: PriceFormat,
    symbol: impl Into<String>,
) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let mut records = reader.records();
    let mut rows = Vec::new();
    let (date_col, close_col) = match format {
        PriceFormat::TwoColumn => (0, 1),
        PriceFormat::YahooCsv => {
            let header = records.next().ok_or(Error::TooShort { needed: 2, got: 0 })??;
            let find = |name: &'static str| {
                header
                    .iter()
                    .position(|h| h.eq_ignore_ascii_case(name))
                    .ok_or(Error::MissingColumn(name))
            };
            (find("Date")?, find("Close")?)
        }
    };

    let mut first = true;
    for record in records {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let date_field = record.get(date_col).unwrap_or("");
        let close_field = record.get(close_col).unwrap_or("");
        if first && format == PriceFormat::TwoColumn && date_field.eq_ignore_ascii_case("date") {
            first = false;
            continue;
        }
        first = false;
        let date = NaiveDate::parse_from_str(date_field, "%Y-%m-%d").map_err(|_| Error::BadRow {
            row,
            reason: format!("unparseable date {date_field:?}"),
        })?;
        let close: f64 = close_field.parse().map_err(|_| Error::BadRow {
            row,
            reason: format!("non-numeric close {close_field:?}"),
        })?;
        if !(close > 0.0) || !close.is_finite() {
            return Err(Error::BadRow {
                row,
                reason: format!("non-positive price {close_field}"),
            });
        }
        rows.push((date, close));
    }
    PriceSeries::new(symbol, rows)
}

/// Raw log-returns `R(t') = ln Y(t') - ln Y(t'-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawReturnSeries {
    values: Vec<f64>,
}

impl RawReturnSeries {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
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
}

pub fn log_returns(prices: &PriceSeries) -> RawReturnSeries {
    let values = prices
        .closes
        .windows(2)
        .map(|w| w[1].ln() - w[0].ln())
        .collect();
    RawReturnSeries { values }
}

/// Zero-mean, unit-variance returns together with the moments that were
/// removed.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    mean_raw: f64,
    sigma_raw: f64,
}

impl ReturnSeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mean_raw(&self) -> f64 {
        self.mean_raw
    }

    pub fn sigma_raw(&self) -> f64 {
        self.sigma_raw
    }

    /// Undoes the normalization: `r * sigma + mean`.
    pub fn denormalize(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|r| r * self.sigma_raw + self.mean_raw)
            .collect()
    }
}

/// Population mean and standard deviation (divide by `n`).
pub fn population_moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn normalize(raw: &RawReturnSeries) -> Result<ReturnSeries> {
    normalize_values(&raw.values)
}

pub fn normalize_values(raw: &[f64]) -> Result<ReturnSeries> {
    if raw.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: raw.len(),
        });
    }
    let (mean, sigma) = population_moments(raw);
    // Exact constancy can leave a rounding residue in sigma; compare the
    // spread against the magnitude of the data.
    let scale = raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(sigma > scale * 1e-14) || !sigma.is_finite() {
        return Err(Error::DegenerateSeries);
    }
    let values = raw.iter().map(|x| (x - mean) / sigma).collect();
    Ok(ReturnSeries {
        values,
        mean_raw: mean,
        sigma_raw: sigma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolatilityKind {
    /// `v(t') = |r(t')|`
    Abs,
    /// `v1(t')`: root mean square of the last `m` returns.
    RmsWindow,
    /// `v2`: root mean square over the whole averaging window.
    RmsCumulative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VolatilitySpec {
    pub kind: VolatilityKind,
    /// Window length in days; only read for [`VolatilityKind::RmsWindow`].
    pub m: usize,
}

impl VolatilitySpec {
    pub const DEFAULT_M: usize = 5;

    pub fn abs() -> Self {
        Self {
            kind: VolatilityKind::Abs,
            m: 1,
        }
    }

    pub fn rms_window(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("volatility window m must be >= 1".into()));
        }
        Ok(Self {
            kind: VolatilityKind::RmsWindow,
            m,
        })
    }

    pub fn rms_cumulative() -> Self {
        Self {
            kind: VolatilityKind::RmsCumulative,
            m: 1,
        }
    }

    /// Smallest averaging window the estimator admits.
    pub fn min_window(&self) -> usize {
        match self.kind {
            VolatilityKind::RmsWindow => self.m,
            _ => 1,
        }
    }
}

impl Default for VolatilitySpec {
    fn default() -> Self {
        Self::abs()
    }
}

impl fmt::Display for VolatilitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VolatilityKind::Abs => write!(f, "abs"),
            VolatilityKind::RmsWindow => write!(f, "rms:{}", self.m),
            VolatilityKind::RmsCumulative => write!(f, "rmscum"),
        }
    }
}

impl FromStr for VolatilitySpec {
    type Err = Error;

    /// Accepts `abs`, `rms` (m = 5), `rms:<m>` and `rmscum`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "abs" => Ok(Self::abs()),
            "rms" => Self::rms_window(Self::DEFAULT_M),
            "rmscum" => Ok(Self::rms_cumulative()),
            _ => match s.strip_prefix("rms:") {
                Some(m) => {
                    let m = m
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad rms window {m:?}")))?;
                    Self::rms_window(m)
                }
                None => Err(Error::InvalidParameter(format!("unknown volatility {s:?}"))),
            },
        }
    }
}

/// Pointwise volatility. `values[k]` is the volatility at `t' = first_valid + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries {
    values: Vec<f64>,
    spec: VolatilitySpec,
    first_valid: usize,
}

impl VolatilitySeries {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> VolatilitySpec {
        self.spec
    }

    pub fn first_valid(&self) -> usize {
        self.first_valid
    }

    /// Volatility at 1-based `t_prime`, if defined.
    pub fn get(&self, t_prime: usize) -> Option<f64> {
        t_prime
            .checked_sub(self.first_valid)
            .and_then(|k| self.values.get(k).copied())
    }
}

pub fn volatility(returns: &[f64], spec: VolatilitySpec) -> Result<VolatilitySeries> {
    match spec.kind {
        VolatilityKind::Abs => Ok(VolatilitySeries {
            values: returns.iter().map(|r| r.abs()).collect(),
            spec,
            first_valid: 1,
        }),
        VolatilityKind::RmsWindow => {
            let m = spec.m;
            if m == 0 {
                return Err(Error::InvalidParameter("volatility window m must be >= 1".into()));
            }
            if returns.len() < m {
                return Err(Error::TooShort {
                    needed: m,
                    got: returns.len(),
                });
            }
            let values = returns
                .windows(m)
                .map(|w| (w.iter().map(|r| r * r).sum::<f64>() / m as f64).sqrt())
                .collect();
            Ok(VolatilitySeries {
                values,
                spec,
                first_valid: m,
            })
        }
        VolatilityKind::RmsCumulative => Err(Error::WindowLevelOnly),
    }
}

/// Seeded uniform permutation of `values`.
pub fn shuffle_values(values: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = values.to_vec();
    out.shuffle(&mut rng);
    out
}

/// Randomizes the time order of a normalized series. Mean and standard
/// deviation are permutation invariant, so the stored moments carry over.
pub fn shuffle(returns: &ReturnSeries, seed: u64) -> ReturnSeries {
    ReturnSeries {
        values: shuffle_values(&returns.values, seed),
        mean_raw: returns.mean_raw,
        sigma_raw: returns.sigma_raw,
    }
}
