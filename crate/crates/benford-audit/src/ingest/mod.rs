//! Panel ingestion: dated index levels, percentage log-returns, and
//! per-sector pooling across countries.
//!
//! Levels live in a [`PricePanel`] keyed by `(country, sector)`. Returns are
//! computed per series with `r_t = 100·ln(P_t / P_{t-1})` for consecutive
//! months only; a missing month splits the series and no return bridges the
//! gap. [`pool_sector`] unions return values for one sector across countries
//! into a [`PooledSample`].

mod parse;

pub use parse::{parse_price_panel, DateFormat, ParseError, ParseSchema};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised when constructing or combining panel values.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("month {0} out of range 1..=12")]
    InvalidMonth(u32),
    #[error("series {country}/{sector}: dates must be strictly increasing at {date}")]
    UnorderedDates {
        country: String,
        sector: String,
        date: ObservationDate,
    },
    #[error("series {country}/{sector}: non-positive level {level} at {date}")]
    NonPositiveLevel {
        country: String,
        sector: String,
        date: ObservationDate,
        level: f64,
    },
    #[error("duplicate series for ({country}, {sector})")]
    DuplicateSeries { country: String, sector: String },
    #[error("sector mismatch: expected {expected}, found {found} (country {country})")]
    SectorMismatch {
        expected: String,
        found: String,
        country: String,
    },
}

/// A calendar month, totally ordered chronologically.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ObservationDate {
    year: i32,
    month: u8,
}

impl ObservationDate {
    pub fn new(year: i32, month: u32) -> Result<Self, IngestError> {
        if !(1..=12).contains(&month) {
            return Err(IngestError::InvalidMonth(month));
        }
        Ok(Self {
            year,
            month: month as u8,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u8 {
        self.month
    }

    /// The following calendar month.
    pub fn next_month(&self) -> Self {
        if self.month == 12 {
            Self {
                year: self.year + 1,
                month: 1,
            }
        } else {
            Self {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// True when `other` is exactly the month after `self` (no gap).
    pub fn precedes(&self, other: &Self) -> bool {
        self.next_month() == *other
    }
}

impl fmt::Display for ObservationDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// One (country, sector) series of strictly positive monthly index levels.
///
/// Dates are strictly increasing; calendar gaps are representable simply by
/// absent months.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    country: String,
    sector: String,
    points: Vec<(ObservationDate, f64)>,
}

impl PriceSeries {
    pub fn new(
        country: impl Into<String>,
        sector: impl Into<String>,
        points: Vec<(ObservationDate, f64)>,
    ) -> Result<Self, IngestError> {
        let country = country.into();
        let sector = sector.into();
        for window in points.windows(2) {
            if window[1].0 <= window[0].0 {
                return Err(IngestError::UnorderedDates {
                    country,
                    sector,
                    date: window[1].0,
                });
            }
        }
        for &(date, level) in &points {
            if !(level.is_finite() && level > 0.0) {
                return Err(IngestError::NonPositiveLevel {
                    country,
                    sector,
                    date,
                    level,
                });
            }
        }
        Ok(Self {
            country,
            sector,
            points,
        })
    }

    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn sector(&self) -> &str {
        &self.sector
    }

    pub fn points(&self) -> &[(ObservationDate, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A collection of price series, at most one per `(country, sector)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PricePanel {
    series: BTreeMap<(String, String), PriceSeries>,
    provenance: String,
}

impl PricePanel {
    pub fn new(provenance: impl Into<String>) -> Self {
        Self {
            series: BTreeMap::new(),
            provenance: provenance.into(),
        }
    }

    pub fn insert(&mut self, series: PriceSeries) -> Result<(), IngestError> {
        let key = (series.country.clone(), series.sector.clone());
        if self.series.contains_key(&key) {
            return Err(IngestError::DuplicateSeries {
                country: key.0,
                sector: key.1,
            });
        }
        self.series.insert(key, series);
        Ok(())
    }

    pub fn get(&self, country: &str, sector: &str) -> Option<&PriceSeries> {
        self.series
            .get(&(country.to_string(), sector.to_string()))
    }

    /// Series in deterministic (country, sector) order.
    pub fn series(&self) -> impl Iterator<Item = &PriceSeries> {
        self.series.values()
    }

    /// Sorted, deduplicated sector names present in the panel.
    pub fn sectors(&self) -> Vec<String> {
        let mut sectors: Vec<String> = self
            .series
            .keys()
            .map(|(_, sector)| sector.clone())
            .collect();
        sectors.sort();
        sectors.dedup();
        sectors
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Keep only series whose sector is in `sectors`.
    pub fn retain_sectors(&mut self, sectors: &[String]) {
        self.series
            .retain(|(_, sector), _| sectors.iter().any(|s| s == sector));
    }
}

/// Percentage log-returns for one series, each attached to the later of the
/// two months it spans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    country: String,
    sector: String,
    points: Vec<(ObservationDate, f64)>,
}

impl ReturnSeries {
    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn sector(&self) -> &str {
        &self.sector
    }

    pub fn points(&self) -> &[(ObservationDate, f64)] {
        &self.points
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|&(_, r)| r)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Compute `100·ln(P_t / P_{t-1})` for every pair of consecutive months.
///
/// A calendar gap between two observations produces no return; a series of
/// `T` gap-free months yields exactly `T − 1` returns.
pub fn compute_log_returns(series: &PriceSeries) -> ReturnSeries {
    let mut points = Vec::new();
    for window in series.points.windows(2) {
        let (prev_date, prev_level) = window[0];
        let (date, level) = window[1];
        if prev_date.precedes(&date) {
            points.push((date, 100.0 * (level / prev_level).ln()));
        }
    }
    ReturnSeries {
        country: series.country.clone(),
        sector: series.sector.clone(),
        points,
    }
}

/// All return values for one sector pooled across countries and time.
///
/// Values are stored sorted ascending, which makes every downstream
/// statistic independent of pooling order by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledSample {
    sector: String,
    values: Vec<f64>,
}

impl PooledSample {
    pub fn from_values(sector: impl Into<String>, mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite return values"));
        Self {
            sector: sector.into(),
            values,
        }
    }

    pub fn sector(&self) -> &str {
        &self.sector
    }

    /// Values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Union (with multiplicity) of return values across series of one sector.
pub fn pool_sector(returns: &[ReturnSeries], sector: &str) -> Result<PooledSample, IngestError> {
    let mut values = Vec::new();
    for series in returns {
        if series.sector != sector {
            return Err(IngestError::SectorMismatch {
                expected: sector.to_string(),
                found: series.sector.clone(),
                country: series.country.clone(),
            });
        }
        values.extend(series.values());
    }
    Ok(PooledSample::from_values(sector, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(y: i32, m: u32) -> ObservationDate {
        ObservationDate::new(y, m).unwrap()
    }

    fn series(levels: &[(i32, u32, f64)]) -> PriceSeries {
        let points = levels
            .iter()
            .map(|&(y, m, level)| (date(y, m), level))
            .collect();
        PriceSeries::new("China", "MATS", points).unwrap()
    }

    #[test]
    fn date_ordering_is_chronological() {
        assert!(date(2000, 12) < date(2001, 1));
        assert!(date(2000, 6) < date(2000, 7));
        assert!(date(1999, 12) < date(2000, 1));
        assert!(date(2000, 12).precedes(&date(2001, 1)));
        assert!(!date(2000, 12).precedes(&date(2001, 2)));
    }

    #[test]
    fn date_rejects_bad_month() {
        assert!(ObservationDate::new(2000, 0).is_err());
        assert!(ObservationDate::new(2000, 13).is_err());
    }

    #[test]
    fn series_rejects_unordered_and_nonpositive() {
        let unordered = vec![(date(2000, 7), 1.0), (date(2000, 6), 2.0)];
        assert!(PriceSeries::new("C", "S", unordered).is_err());
        let duplicated = vec![(date(2000, 6), 1.0), (date(2000, 6), 2.0)];
        assert!(PriceSeries::new("C", "S", duplicated).is_err());
        let zero = vec![(date(2000, 6), 0.0)];
        assert!(PriceSeries::new("C", "S", zero).is_err());
        let negative = vec![(date(2000, 6), -3.0)];
        assert!(PriceSeries::new("C", "S", negative).is_err());
    }

    #[test]
    fn first_table_return_matches_oracle() {
        // 100·ln(419.54/393.85), frozen from an independent computation.
        let s = series(&[(2000, 6, 393.85), (2000, 7, 419.54)]);
        let r = compute_log_returns(&s);
        assert_eq!(r.len(), 1);
        assert!((r.points()[0].1 - 6.318874682131022).abs() < 1e-12);
        assert_eq!(r.points()[0].0, date(2000, 7));
    }

    #[test]
    fn constant_series_yields_zero_returns() {
        let s = series(&[(2000, 1, 100.0), (2000, 2, 100.0), (2000, 3, 100.0)]);
        let r = compute_log_returns(&s);
        assert_eq!(
            r.points().iter().map(|&(_, v)| v).collect::<Vec<_>>(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn single_point_series_yields_no_returns() {
        let s = series(&[(2000, 1, 100.0)]);
        assert!(compute_log_returns(&s).is_empty());
    }

    #[test]
    fn gap_splits_return_series() {
        // 2000-03 missing: no return spans 2000-02 -> 2000-04.
        let s = series(&[
            (2000, 1, 100.0),
            (2000, 2, 110.0),
            (2000, 4, 120.0),
            (2000, 5, 130.0),
        ]);
        let r = compute_log_returns(&s);
        assert_eq!(r.len(), 2);
        assert_eq!(r.points()[0].0, date(2000, 2));
        assert_eq!(r.points()[1].0, date(2000, 5));
    }

    #[test]
    fn consecutive_months_yield_t_minus_one_returns() {
        let levels: Vec<(i32, u32, f64)> =
            (1..=12).map(|m| (2000, m, 100.0 + m as f64)).collect();
        let r = compute_log_returns(&series(&levels));
        assert_eq!(r.len(), 11);
    }

    #[test]
    fn returns_invariant_under_level_rescaling() {
        let levels = [
            (2000, 1, 393.85),
            (2000, 2, 419.54),
            (2000, 3, 672.12),
            (2000, 4, 551.57),
        ];
        let base = compute_log_returns(&series(&levels));
        for c in [0.001, 0.37, 10.0, 1000.0] {
            let scaled: Vec<(i32, u32, f64)> = levels
                .iter()
                .map(|&(y, m, level)| (y, m, c * level))
                .collect();
            let r = compute_log_returns(&series(&scaled));
            for (a, b) in base.values().zip(r.values()) {
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()),
                    "c={c}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn pooling_counts_and_mismatch() {
        let a = compute_log_returns(&series(&[
            (2000, 1, 100.0),
            (2000, 2, 110.0),
            (2000, 3, 120.0),
            (2000, 4, 130.0),
        ]));
        let mut b_levels = vec![
            (date(2001, 1), 50.0),
            (date(2001, 2), 55.0),
            (date(2001, 3), 60.0),
            (date(2001, 4), 66.0),
            (date(2001, 5), 70.0),
        ];
        b_levels.sort_by_key(|&(d, _)| d);
        let b = compute_log_returns(&PriceSeries::new("Brazil", "MATS", b_levels).unwrap());
        let pooled = pool_sector(&[a.clone(), b.clone()], "MATS").unwrap();
        assert_eq!(pooled.n(), 7);

        let one = pool_sector(std::slice::from_ref(&a), "MATS").unwrap();
        let mut expected: Vec<f64> = a.values().collect();
        expected.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(one.values(), expected.as_slice());

        assert!(pool_sector(&[a, b], "GDS").is_err());
    }

    #[test]
    fn pooling_is_order_insensitive() {
        let a = compute_log_returns(&series(&[
            (2000, 1, 100.0),
            (2000, 2, 150.0),
            (2000, 3, 120.0),
        ]));
        let b = compute_log_returns(&PriceSeries::new(
            "India",
            "MATS",
            vec![(date(2000, 1), 80.0), (date(2000, 2), 90.0)],
        )
        .unwrap());
        let ab = pool_sector(&[a.clone(), b.clone()], "MATS").unwrap();
        let ba = pool_sector(&[b, a], "MATS").unwrap();
        assert_eq!(ab.values(), ba.values());
    }

    #[test]
    fn panel_rejects_duplicate_key() {
        let mut panel = PricePanel::new("test");
        panel.insert(series(&[(2000, 1, 1.0)])).unwrap();
        assert!(panel.insert(series(&[(2001, 1, 2.0)])).is_err());
    }
}
