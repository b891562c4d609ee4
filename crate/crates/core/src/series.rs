//! Return series, zero detection and price ingestion.
//!
//! A [`ReturnSeries`] holds daily log-returns `r_1..r_n` together with the
//! tolerance used to flag zero returns. The amplitude indicator is
//! `a_t = 0` when `|r_t| <= zero_tolerance` and `a_t = 1` otherwise.
//! Rows are consumed in file order; missing calendar days are not imputed.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered daily log-returns with their zero-detection tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    values: Vec<f64>,
    zero_tolerance: f64,
}

impl ReturnSeries {
    /// Builds a series with exact zero detection.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(values, 0.0)
    }

    pub fn with_tolerance(values: Vec<f64>, zero_tolerance: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput(
                "a return series needs at least one value".into(),
            ));
        }
        if !(zero_tolerance >= 0.0 && zero_tolerance.is_finite()) {
            return Err(Error::Validation(format!(
                "zero tolerance must be finite and non-negative, got {zero_tolerance}"
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "return at position {} is not finite",
                pos + 1
            )));
        }
        Ok(Self {
            values,
            zero_tolerance,
        })
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

    pub fn zero_tolerance(&self) -> f64 {
        self.zero_tolerance
    }

    /// Indicator of a non-zero return at position `t` (0-based).
    #[inline]
    pub fn is_nonzero(&self, t: usize) -> bool {
        self.values[t].abs() > self.zero_tolerance
    }

    /// The amplitude-modulating sequence `(a_1, …, a_n)` as 0/1 reals.
    pub fn amplitude(&self) -> Vec<f64> {
        (0..self.len())
            .map(|t| if self.is_nonzero(t) { 1.0 } else { 0.0 })
            .collect()
    }

    /// `1 − n⁻¹ Σ a_t`.
    pub fn empirical_zero_fraction(&self) -> f64 {
        let nonzero = (0..self.len()).filter(|&t| self.is_nonzero(t)).count();
        1.0 - nonzero as f64 / self.len() as f64
    }

    /// Returns minus their sample mean. The indicator of the result is
    /// recomputed from the demeaned values.
    pub fn demeaned(&self) -> Self {
        let mean = self.values.iter().sum::<f64>() / self.len() as f64;
        Self {
            values: self.values.iter().map(|v| v - mean).collect(),
            zero_tolerance: self.zero_tolerance,
        }
    }

    /// Multiplies every return by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            zero_tolerance: self.zero_tolerance * c.abs(),
        }
    }
}

/// One dated closing price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub close: f64,
}

/// Closing prices with strictly increasing dates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceTable {
    rows: Vec<PriceRow>,
}

impl PriceTable {
    pub fn new(rows: Vec<PriceRow>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if !(row.close.is_finite() && row.close > 0.0) {
                return Err(Error::Validation(format!(
                    "close on {} must be positive and finite, got {}",
                    row.date, row.close
                )));
            }
            if i > 0 && rows[i - 1].date >= row.date {
                return Err(Error::Validation(format!(
                    "dates must be strictly increasing: {} follows {}",
                    row.date,
                    rows[i - 1].date
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Builds a table from bare closes on consecutive synthetic dates.
    pub fn from_closes(closes: &[f64]) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let rows = closes
            .iter()
            .zip(start.iter_days())
            .map(|(&close, date)| PriceRow { date, close })
            .collect();
        Self::new(rows)
    }

    pub fn rows(&self) -> &[PriceRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Log-returns `ln(close_t) − ln(close_{t−1})` of consecutive rows.
pub fn from_prices(table: &PriceTable, zero_tolerance: f64) -> Result<ReturnSeries> {
    if table.len() < 2 {
        return Err(Error::EmptyInput(format!(
            "need at least 2 prices to form a return, got {}",
            table.len()
        )));
    }
    let returns = table
        .rows()
        .windows(2)
        .map(|w| w[1].close.ln() - w[0].close.ln())
        .collect();
    ReturnSeries::with_tolerance(returns, zero_tolerance)
}

/// What a CSV file contained.
#[derive(Debug, Clone, PartialEq)]
pub enum CsvInput {
    Prices(PriceTable),
    Returns(Vec<f64>),
}

impl CsvInput {
    pub fn into_series(self, zero_tolerance: f64) -> Result<ReturnSeries> {
        match self {
            CsvInput::Prices(table) => from_prices(&table, zero_tolerance),
            CsvInput::Returns(values) => ReturnSeries::with_tolerance(values, zero_tolerance),
        }
    }
}

/// Reads either a `date,close` price file or a single-column `return` file.
pub fn read_csv<R: Read>(reader: R) -> Result<CsvInput> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name);

    if let (Some(date_col), Some(close_col)) = (col("date"), col("close")) {
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let date_str = record.get(date_col).unwrap_or("");
            let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|_| {
                Error::Validation(format!("line {line}: cannot parse date {date_str:?}"))
            })?;
            let close = parse_number(record.get(close_col).unwrap_or(""), line)?;
            rows.push(PriceRow { date, close });
        }
        return Ok(CsvInput::Prices(PriceTable::new(rows)?));
    }

    if let Some(ret_col) = col("return") {
        let mut values = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            values.push(parse_number(record.get(ret_col).unwrap_or(""), i + 2)?);
        }
        return Ok(CsvInput::Returns(values));
    }

    Err(Error::Validation(
        "CSV header must contain `date` and `close`, or `return`".into(),
    ))
}

pub fn read_csv_path(path: impl AsRef<Path>) -> Result<CsvInput> {
    let file = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(file))
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::Validation(format!("line {line}: cannot parse number {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::Validation(format!(
            "line {line}: value {field:?} is not finite"
        )));
    }
    Ok(v)
}
