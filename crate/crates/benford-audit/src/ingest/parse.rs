//! Delimiter-separated panel parsing.
//!
//! Input is UTF-8 text with a header row, long format: one observation per
//! row with date, country, sector, and level columns named by a
//! [`ParseSchema`]. A blank level cell is a gap, not a zero; the series key
//! is still registered, so a fully blank series parses to an empty
//! [`PriceSeries`]. Diagnostics carry 1-based file line numbers (the header
//! is line 1).

use std::collections::BTreeMap;
use std::io::Read;
use std::str::FromStr;

use thiserror::Error;

use super::{ObservationDate, PricePanel, PriceSeries};

/// Supported date spellings for the date column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DateFormat {
    /// `DD/MM/YY`, two-digit year with pivot 70 (`00..=69` → 2000s).
    DayMonthYear2,
    /// `YYYY-MM`.
    YearMonth,
}

impl DateFormat {
    pub fn as_str(&self) -> &'static str {
        match self {
            DateFormat::DayMonthYear2 => "DD/MM/YY",
            DateFormat::YearMonth => "YYYY-MM",
        }
    }

    fn parse(&self, text: &str) -> Option<ObservationDate> {
        match self {
            DateFormat::DayMonthYear2 => {
                let mut parts = text.split('/');
                let day: u32 = parts.next()?.trim().parse().ok()?;
                let month: u32 = parts.next()?.trim().parse().ok()?;
                let yy: i32 = parts.next()?.trim().parse().ok()?;
                if parts.next().is_some() || !(1..=31).contains(&day) || !(0..=99).contains(&yy) {
                    return None;
                }
                let year = if yy < 70 { 2000 + yy } else { 1900 + yy };
                ObservationDate::new(year, month).ok()
            }
            DateFormat::YearMonth => {
                let (year, month) = text.split_once('-')?;
                let year: i32 = year.trim().parse().ok()?;
                let month: u32 = month.trim().parse().ok()?;
                ObservationDate::new(year, month).ok()
            }
        }
    }
}

impl FromStr for DateFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "DD/MM/YY" => Ok(DateFormat::DayMonthYear2),
            "YYYY-MM" => Ok(DateFormat::YearMonth),
            other => Err(format!(
                "unsupported date format {other:?} (expected \"DD/MM/YY\" or \"YYYY-MM\")"
            )),
        }
    }
}

/// Column mapping and format configuration for panel input.
#[derive(Debug, Clone)]
pub struct ParseSchema {
    pub delimiter: u8,
    pub date_format: DateFormat,
    pub date_column: String,
    pub country_column: String,
    pub sector_column: String,
    pub level_column: String,
}

impl Default for ParseSchema {
    fn default() -> Self {
        Self {
            delimiter: b',',
            date_format: DateFormat::YearMonth,
            date_column: "date".to_string(),
            country_column: "country".to_string(),
            sector_column: "sector".to_string(),
            level_column: "level".to_string(),
        }
    }
}

/// Errors raised while parsing panel input.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed delimited input at line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("header row missing column {0:?}")]
    MissingColumn(String),
    #[error("line {line}: malformed date {value:?} (expected {format})")]
    BadDate {
        line: u64,
        value: String,
        format: &'static str,
    },
    #[error("line {line}: malformed level {value:?}")]
    BadLevel { line: u64, value: String },
    #[error("line {line}: non-positive level {value:?}")]
    NonPositiveLevel { line: u64, value: String },
    #[error("line {line}: empty {column} field")]
    EmptyField { line: u64, column: &'static str },
    #[error("line {line}: duplicate observation for ({country}, {sector}) at {date}")]
    DuplicateObservation {
        line: u64,
        country: String,
        sector: String,
        date: ObservationDate,
    },
}

impl ParseError {
    /// The 1-based input line the error points at, when it has one.
    pub fn line(&self) -> Option<u64> {
        match self {
            ParseError::Io(_) | ParseError::MissingColumn(_) => None,
            ParseError::Malformed { line, .. }
            | ParseError::BadDate { line, .. }
            | ParseError::BadLevel { line, .. }
            | ParseError::NonPositiveLevel { line, .. }
            | ParseError::EmptyField { line, .. }
            | ParseError::DuplicateObservation { line, .. } => Some(*line),
        }
    }
}

/// Parse a delimiter-separated byte stream into a [`PricePanel`].
///
/// Rows are normalized to chronological order per series regardless of file
/// order. `provenance` is a free-text source label carried on the panel.
pub fn parse_price_panel<R: Read>(
    source: R,
    schema: &ParseSchema,
    provenance: &str,
) -> Result<PricePanel, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(true)
        .from_reader(source);

    let headers = reader
        .headers()
        .map_err(|e| csv_error(&e))?
        .clone();
    let column = |name: &str| -> Result<usize, ParseError> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| ParseError::MissingColumn(name.to_string()))
    };
    let date_idx = column(&schema.date_column)?;
    let country_idx = column(&schema.country_column)?;
    let sector_idx = column(&schema.sector_column)?;
    let level_idx = column(&schema.level_column)?;

    // (country, sector) -> date -> level; BTreeMap normalizes order and
    // detects duplicate dates on insert.
    let mut observed: BTreeMap<(String, String), BTreeMap<ObservationDate, f64>> = BTreeMap::new();

    let mut line: u64 = 1; // header
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        line = record.position().map_or(line + 1, |p| p.line());

        let field = |idx: usize| record.get(idx).unwrap_or("").trim();
        let country = field(country_idx);
        if country.is_empty() {
            return Err(ParseError::EmptyField {
                line,
                column: "country",
            });
        }
        let sector = field(sector_idx);
        if sector.is_empty() {
            return Err(ParseError::EmptyField {
                line,
                column: "sector",
            });
        }
        let date_text = field(date_idx);
        let date = schema.date_format.parse(date_text).ok_or_else(|| {
            ParseError::BadDate {
                line,
                value: date_text.to_string(),
                format: schema.date_format.as_str(),
            }
        })?;

        let key = (country.to_string(), sector.to_string());
        let series = observed.entry(key).or_default();

        let level_text = field(level_idx);
        if level_text.is_empty() {
            // Gap: the series exists but this month has no observation.
            continue;
        }
        let level: f64 = level_text.parse().map_err(|_| ParseError::BadLevel {
            line,
            value: level_text.to_string(),
        })?;
        if !(level.is_finite() && level > 0.0) {
            return Err(ParseError::NonPositiveLevel {
                line,
                value: level_text.to_string(),
            });
        }
        if series.insert(date, level).is_some() {
            return Err(ParseError::DuplicateObservation {
                line,
                country: country.to_string(),
                sector: sector.to_string(),
                date,
            });
        }
    }

    let mut panel = PricePanel::new(provenance);
    for ((country, sector), points) in observed {
        let points: Vec<(ObservationDate, f64)> = points.into_iter().collect();
        let series = PriceSeries::new(country, sector, points)
            .expect("levels validated during parsing");
        panel.insert(series).expect("keys unique by construction");
    }
    Ok(panel)
}

fn csv_error(e: &csv::Error) -> ParseError {
    let line = e
        .position()
        .map(|p| p.line())
        .unwrap_or(0);
    ParseError::Malformed {
        line,
        message: e.to_string(),
    }
}
