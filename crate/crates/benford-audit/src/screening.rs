//! Stale-value screening: detect runs of identical consecutive index levels
//! and produce an adapted panel with those observations deleted.
//!
//! A run is a maximal stretch of month-consecutive observations carrying
//! exactly the same parsed level (bit-identical; vendor staleness reproduces
//! values bit-for-bit, so no tolerance matching). A calendar gap breaks a
//! run. Deletion operates on price levels and returns are recomputed, so the
//! zero returns inside a run and the contaminated boundary returns disappear
//! together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{compute_log_returns, ObservationDate, PricePanel, PriceSeries};

#[derive(Debug, Error)]
pub enum ScreeningError {
    #[error("min_run must be at least 2, got {0}")]
    MinRunTooSmall(usize),
    #[error("flag references nonexistent series ({country}, {sector})")]
    UnknownSeries { country: String, sector: String },
    #[error(
        "flag for ({country}, {sector}) at {start_date} does not match the panel (length {run_length}, value {value})"
    )]
    FlagMismatch {
        country: String,
        sector: String,
        start_date: ObservationDate,
        run_length: usize,
        value: f64,
    },
}

/// What to delete from a flagged run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeletionPolicy {
    /// Keep the first observation of the run, delete the remaining
    /// `run_length − 1` stale copies (default).
    DropRunTail,
    /// Delete all `run_length` observations.
    DropEntireRun,
}

impl DeletionPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            DeletionPolicy::DropRunTail => "drop-run-tail",
            DeletionPolicy::DropEntireRun => "drop-entire-run",
        }
    }
}

impl fmt::Display for DeletionPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DeletionPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "drop-run-tail" => Ok(DeletionPolicy::DropRunTail),
            "drop-entire-run" => Ok(DeletionPolicy::DropEntireRun),
            other => Err(format!(
                "unknown policy {other:?} (expected \"drop-run-tail\" or \"drop-entire-run\")"
            )),
        }
    }
}

/// Screening parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningConfig {
    pub min_run: usize,
    pub policy: DeletionPolicy,
}

impl ScreeningConfig {
    pub fn new(min_run: usize, policy: DeletionPolicy) -> Result<Self, ScreeningError> {
        if min_run < 2 {
            return Err(ScreeningError::MinRunTooSmall(min_run));
        }
        Ok(Self { min_run, policy })
    }
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        Self {
            min_run: 4,
            policy: DeletionPolicy::DropRunTail,
        }
    }
}

/// One maximal run of identical consecutive levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionFlag {
    pub country: String,
    pub sector: String,
    pub start_date: ObservationDate,
    pub run_length: usize,
    pub value: f64,
}

impl RepetitionFlag {
    /// One-line audit-log rendering.
    pub fn audit_line(&self) -> String {
        format!(
            "REPETITION country={} sector={} start={} length={} value={}",
            self.country, self.sector, self.start_date, self.run_length, self.value
        )
    }
}

/// Per-series count of deleted observations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRemoval {
    pub country: String,
    pub sector: String,
    pub removed: usize,
}

/// Pooled return counts for one sector before and after adaptation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorReturnCounts {
    pub sector: String,
    pub n_before: usize,
    pub n_after: usize,
}

/// What screening found and removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningSummary {
    pub flags: Vec<RepetitionFlag>,
    pub removed_observations: Vec<SeriesRemoval>,
    pub sector_return_counts: Vec<SectorReturnCounts>,
}

impl ScreeningSummary {
    /// Human-readable audit log, one line per flag.
    pub fn audit_log(&self) -> String {
        let mut out = String::new();
        for flag in &self.flags {
            out.push_str(&flag.audit_line());
            out.push('\n');
        }
        out
    }
}

/// Find every maximal run of identical month-consecutive levels with length
/// at least `config.min_run`, ordered by start date.
pub fn detect_repetitions(series: &PriceSeries, config: &ScreeningConfig) -> Vec<RepetitionFlag> {
    let points = series.points();
    let mut flags = Vec::new();
    let mut start = 0;
    while start < points.len() {
        let (start_date, value) = points[start];
        let mut end = start + 1;
        let mut prev_date = start_date;
        while end < points.len() {
            let (date, level) = points[end];
            if level.to_bits() == value.to_bits() && prev_date.precedes(&date) {
                prev_date = date;
                end += 1;
            } else {
                break;
            }
        }
        let run_length = end - start;
        if run_length >= config.min_run {
            flags.push(RepetitionFlag {
                country: series.country().to_string(),
                sector: series.sector().to_string(),
                start_date,
                run_length,
                value,
            });
        }
        start = end;
    }
    flags
}

/// [`detect_repetitions`] over every series in a panel, ordered by
/// (country, sector, start date).
pub fn detect_panel(panel: &PricePanel, config: &ScreeningConfig) -> Vec<RepetitionFlag> {
    panel
        .series()
        .flat_map(|series| detect_repetitions(series, config))
        .collect()
}

/// Delete flagged observations and summarize the effect on return counts.
///
/// Under [`DeletionPolicy::DropRunTail`] the first observation of each run is
/// retained and the stale copies are deleted, leaving a calendar gap so no
/// return bridges the deletion. Under [`DeletionPolicy::DropEntireRun`] the
/// whole run goes.
pub fn adapt_panel(
    panel: &PricePanel,
    flags: &[RepetitionFlag],
    config: &ScreeningConfig,
) -> Result<(PricePanel, ScreeningSummary), ScreeningError> {
    // Indices to delete, grouped per series.
    let mut deletions: BTreeMap<(String, String), BTreeSet<usize>> = BTreeMap::new();
    for flag in flags {
        let series = panel
            .get(&flag.country, &flag.sector)
            .ok_or_else(|| ScreeningError::UnknownSeries {
                country: flag.country.clone(),
                sector: flag.sector.clone(),
            })?;
        let points = series.points();
        let start = points
            .binary_search_by_key(&flag.start_date, |&(date, _)| date)
            .map_err(|_| flag_mismatch(flag))?;
        if start + flag.run_length > points.len() {
            return Err(flag_mismatch(flag));
        }
        let mut prev_date: Option<ObservationDate> = None;
        for &(date, level) in &points[start..start + flag.run_length] {
            if level.to_bits() != flag.value.to_bits() {
                return Err(flag_mismatch(flag));
            }
            if let Some(prev) = prev_date {
                if !prev.precedes(&date) {
                    return Err(flag_mismatch(flag));
                }
            }
            prev_date = Some(date);
        }
        let delete_from = match config.policy {
            DeletionPolicy::DropRunTail => start + 1,
            DeletionPolicy::DropEntireRun => start,
        };
        deletions
            .entry((flag.country.clone(), flag.sector.clone()))
            .or_default()
            .extend(delete_from..start + flag.run_length);
    }

    let mut adapted = PricePanel::new(panel.provenance());
    let mut removed_observations = Vec::new();
    for series in panel.series() {
        let key = (series.country().to_string(), series.sector().to_string());
        let points = match deletions.get(&key) {
            Some(drop) => {
                removed_observations.push(SeriesRemoval {
                    country: key.0.clone(),
                    sector: key.1.clone(),
                    removed: drop.len(),
                });
                series
                    .points()
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !drop.contains(i))
                    .map(|(_, &p)| p)
                    .collect()
            }
            None => series.points().to_vec(),
        };
        let rebuilt = PriceSeries::new(key.0, key.1, points)
            .expect("subsequence of a valid series is valid");
        adapted.insert(rebuilt).expect("keys unique");
    }

    let sector_return_counts = panel
        .sectors()
        .into_iter()
        .map(|sector| SectorReturnCounts {
            n_before: pooled_return_count(panel, &sector),
            n_after: pooled_return_count(&adapted, &sector),
            sector,
        })
        .collect();

    let summary = ScreeningSummary {
        flags: flags.to_vec(),
        removed_observations,
        sector_return_counts,
    };
    Ok((adapted, summary))
}

fn flag_mismatch(flag: &RepetitionFlag) -> ScreeningError {
    ScreeningError::FlagMismatch {
        country: flag.country.clone(),
        sector: flag.sector.clone(),
        start_date: flag.start_date,
        run_length: flag.run_length,
        value: flag.value,
    }
}

fn pooled_return_count(panel: &PricePanel, sector: &str) -> usize {
    panel
        .series()
        .filter(|s| s.sector() == sector)
        .map(|s| compute_log_returns(s).len())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{parse_price_panel, DateFormat, ParseSchema};

    fn date(y: i32, m: u32) -> ObservationDate {
        ObservationDate::new(y, m).unwrap()
    }

    fn china_panel() -> PricePanel {
        let bytes: &[u8] = include_bytes!("../fixtures/china_2000_2001.csv");
        let schema = ParseSchema {
            date_format: DateFormat::DayMonthYear2,
            ..ParseSchema::default()
        };
        parse_price_panel(bytes, &schema, "fixture").unwrap()
    }

    fn series(levels: &[(i32, u32, f64)]) -> PriceSeries {
        let points = levels
            .iter()
            .map(|&(y, m, level)| (date(y, m), level))
            .collect();
        PriceSeries::new("China", "HEA", points).unwrap()
    }

    #[test]
    fn china_hea_run_is_flagged_once() {
        let panel = china_panel();
        let flags = detect_panel(&panel, &ScreeningConfig::default());
        assert_eq!(flags.len(), 1);
        let flag = &flags[0];
        assert_eq!(flag.sector, "HEA");
        assert_eq!(flag.value, 444.19);
        assert_eq!(flag.run_length, 7);
        assert_eq!(flag.start_date, date(2000, 9));
    }

    #[test]
    fn strictly_increasing_series_has_no_flags() {
        let s = series(&[(2000, 1, 1.0), (2000, 2, 2.0), (2000, 3, 3.0)]);
        assert!(detect_repetitions(&s, &ScreeningConfig::default()).is_empty());
    }

    #[test]
    fn run_below_threshold_is_not_flagged() {
        let s = series(&[
            (2000, 1, 5.0),
            (2000, 2, 5.0),
            (2000, 3, 5.0),
            (2000, 4, 6.0),
        ]);
        let config = ScreeningConfig::new(4, DeletionPolicy::DropRunTail).unwrap();
        assert!(detect_repetitions(&s, &config).is_empty());
        let config = ScreeningConfig::new(3, DeletionPolicy::DropRunTail).unwrap();
        assert_eq!(detect_repetitions(&s, &config).len(), 1);
    }

    #[test]
    fn calendar_gap_breaks_a_run() {
        // Four equal levels, but 2000-03 is missing: two short stretches.
        let s = series(&[
            (2000, 1, 5.0),
            (2000, 2, 5.0),
            (2000, 4, 5.0),
            (2000, 5, 5.0),
        ]);
        let config = ScreeningConfig::new(4, DeletionPolicy::DropRunTail).unwrap();
        assert!(detect_repetitions(&s, &config).is_empty());
    }

    #[test]
    fn min_run_validation() {
        assert!(ScreeningConfig::new(1, DeletionPolicy::DropRunTail).is_err());
        assert!(ScreeningConfig::new(2, DeletionPolicy::DropRunTail).is_ok());
    }

    #[test]
    fn adapt_china_hea_drop_run_tail() {
        let panel = china_panel();
        let config = ScreeningConfig::default();
        let flags = detect_panel(&panel, &config);
        let (adapted, summary) = adapt_panel(&panel, &flags, &config).unwrap();

        let hea = adapted.get("China", "HEA").unwrap();
        assert_eq!(hea.len(), 6);
        let months: Vec<ObservationDate> = hea.points().iter().map(|&(d, _)| d).collect();
        assert_eq!(
            months,
            vec![
                date(2000, 6),
                date(2000, 7),
                date(2000, 8),
                date(2000, 9),
                date(2001, 4),
                date(2001, 5),
            ]
        );
        let returns = compute_log_returns(hea);
        assert_eq!(returns.len(), 4);
        // Frozen from an independent computation of 100·ln ratios.
        let expected = [
            10.456175963531036,
            11.82476380614091,
            0.6436845370175139,
            -3.4168493752132165,
        ];
        for (&(_, r), want) in returns.points().iter().zip(expected) {
            assert!((r - want).abs() < 1e-12, "{r} vs {want}");
        }

        let hea_counts = summary
            .sector_return_counts
            .iter()
            .find(|c| c.sector == "HEA")
            .unwrap();
        assert_eq!(hea_counts.n_before, 11);
        assert_eq!(hea_counts.n_after, 4);
        assert_eq!(
            summary.removed_observations,
            vec![SeriesRemoval {
                country: "China".into(),
                sector: "HEA".into(),
                removed: 6,
            }]
        );
    }

    #[test]
    fn adapt_china_hea_drop_entire_run() {
        let panel = china_panel();
        let config = ScreeningConfig::new(4, DeletionPolicy::DropEntireRun).unwrap();
        let flags = detect_panel(&panel, &config);
        let (adapted, _) = adapt_panel(&panel, &flags, &config).unwrap();
        let hea = adapted.get("China", "HEA").unwrap();
        assert_eq!(hea.len(), 5);
        // Jun-Aug 2000 plus Apr-May 2001; Sep 2000 went with the run.
        assert_eq!(compute_log_returns(hea).len(), 3);
    }

    #[test]
    fn no_flags_means_identity() {
        let panel = china_panel();
        let config = ScreeningConfig::default();
        let (adapted, summary) = adapt_panel(&panel, &[], &config).unwrap();
        for series in panel.series() {
            assert_eq!(
                adapted
                    .get(series.country(), series.sector())
                    .unwrap()
                    .points(),
                series.points()
            );
        }
        for counts in &summary.sector_return_counts {
            assert_eq!(counts.n_before, counts.n_after);
        }
    }

    #[test]
    fn adapted_panel_rescreens_clean_and_adaptation_is_idempotent() {
        let panel = china_panel();
        for policy in [DeletionPolicy::DropRunTail, DeletionPolicy::DropEntireRun] {
            let config = ScreeningConfig::new(4, policy).unwrap();
            let flags = detect_panel(&panel, &config);
            let (adapted, _) = adapt_panel(&panel, &flags, &config).unwrap();
            let reflag = detect_panel(&adapted, &config);
            assert!(reflag.is_empty(), "policy {policy}: {reflag:?}");
            let (twice, _) = adapt_panel(&adapted, &reflag, &config).unwrap();
            for series in adapted.series() {
                assert_eq!(
                    twice
                        .get(series.country(), series.sector())
                        .unwrap()
                        .points(),
                    series.points()
                );
            }
        }
    }

    #[test]
    fn adjacent_equal_values_across_deleted_run_do_not_reflag() {
        // B,B,B then a run of A's then B again; with the run gone the
        // trailing B is gap-separated and must not extend the B stretch.
        let s = series(&[
            (2000, 1, 2.0),
            (2000, 2, 2.0),
            (2000, 3, 2.0),
            (2000, 4, 1.0),
            (2000, 5, 1.0),
            (2000, 6, 1.0),
            (2000, 7, 1.0),
            (2000, 8, 2.0),
        ]);
        let mut panel = PricePanel::new("t");
        panel.insert(s).unwrap();
        let config = ScreeningConfig::new(4, DeletionPolicy::DropEntireRun).unwrap();
        let flags = detect_panel(&panel, &config);
        assert_eq!(flags.len(), 1);
        let (adapted, _) = adapt_panel(&panel, &flags, &config).unwrap();
        assert!(detect_panel(&adapted, &config).is_empty());
    }

    #[test]
    fn flag_for_unknown_series_is_an_error() {
        let panel = china_panel();
        let flag = RepetitionFlag {
            country: "Brazil".into(),
            sector: "HEA".into(),
            start_date: date(2000, 9),
            run_length: 7,
            value: 444.19,
        };
        let err = adapt_panel(&panel, &[flag], &ScreeningConfig::default()).unwrap_err();
        assert!(matches!(err, ScreeningError::UnknownSeries { .. }));
    }

    #[test]
    fn stale_flag_is_a_mismatch_error() {
        let panel = china_panel();
        let flag = RepetitionFlag {
            country: "China".into(),
            sector: "HEA".into(),
            start_date: date(2000, 9),
            run_length: 7,
            value: 999.99,
        };
        let err = adapt_panel(&panel, &[flag], &ScreeningConfig::default()).unwrap_err();
        assert!(matches!(err, ScreeningError::FlagMismatch { .. }));
    }

    #[test]
    fn audit_line_format() {
        let flag = RepetitionFlag {
            country: "China".into(),
            sector: "HEA".into(),
            start_date: date(2000, 9),
            run_length: 7,
            value: 444.19,
        };
        assert_eq!(
            flag.audit_line(),
            "REPETITION country=China sector=HEA start=2000-09 length=7 value=444.19"
        );
    }
}
