//! Table rendering and plot-ready data: descriptive-stat tables, FSD
//! frequency tables, conformance tables, histograms, and digit bar charts.
//!
//! All rendering is deterministic: rows are ordered by sector name, numbers
//! are fixed-point (4 decimals for frequencies and measures, 6 for
//! descriptive statistics), and identical bundles produce byte-identical
//! output.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conformance::{BenfordReference, ConformanceReport, DescriptiveStats};
use crate::digits::FsdDistribution;
use crate::ingest::PooledSample;
use crate::screening::ScreeningSummary;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("empty sample")]
    EmptySample,
    #[error("bin width must be positive and finite, got {0}")]
    BadBinWidth(f64),
    #[error("empty digit distribution")]
    EmptyDistribution,
    #[error("bundle variants disagree: sector {0} missing from {1}")]
    MissingSector(String, &'static str),
}

/// Which dataset a table renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Raw,
    Adapted,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::Adapted => "adapted",
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "raw" => Ok(Variant::Raw),
            "adapted" => Ok(Variant::Adapted),
            other => Err(format!("unknown variant {other:?} (expected \"raw\" or \"adapted\")")),
        }
    }
}

/// Everything the pipeline knows about one sector in one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorEntry {
    pub sector: String,
    /// `None` when the sector has no returns in this variant.
    pub stats: Option<DescriptiveStats>,
    pub distribution: FsdDistribution,
    /// `None` when the distribution is empty after zero exclusions.
    pub conformance: Option<ConformanceReport>,
}

/// Per-sector results for raw and adapted panels plus the screening record.
///
/// Raw and adapted entries cover the same sector set, in the same sorted
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub raw: Vec<SectorEntry>,
    pub adapted: Vec<SectorEntry>,
    pub screening: ScreeningSummary,
}

impl ReportBundle {
    fn entries(&self, variant: Variant) -> &[SectorEntry] {
        match variant {
            Variant::Raw => &self.raw,
            Variant::Adapted => &self.adapted,
        }
    }

    /// Check the raw/adapted sector sets agree.
    fn validate(&self) -> Result<(), ReportError> {
        for entry in &self.raw {
            if !self.adapted.iter().any(|e| e.sector == entry.sector) {
                return Err(ReportError::MissingSector(entry.sector.clone(), "adapted"));
            }
        }
        for entry in &self.adapted {
            if !self.raw.iter().any(|e| e.sector == entry.sector) {
                return Err(ReportError::MissingSector(entry.sector.clone(), "raw"));
            }
        }
        Ok(())
    }
}

/// Fixed-point with 4 decimals (frequencies and measures).
pub(crate) fn fmt4(v: f64) -> String {
    normalize_zero(format!("{v:.4}"))
}

/// Fixed-point with 6 decimals (descriptive statistics).
pub(crate) fn fmt6(v: f64) -> String {
    normalize_zero(format!("{v:.6}"))
}

fn normalize_zero(s: String) -> String {
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn fmt_count(n: f64) -> String {
    if n.fract() == 0.0 {
        format!("{}", n as i64)
    } else {
        fmt4(n)
    }
}

/// FSD frequency table: one row per sector (obs, e1..e9 in percent), closing
/// with the Benford reference row `FSD BL`.
pub fn render_frequency_table(bundle: &ReportBundle, variant: Variant) -> Result<String, ReportError> {
    bundle.validate()?;
    let reference = BenfordReference::new();
    let mut out = String::from("sector,obs,d1,d2,d3,d4,d5,d6,d7,d8,d9\n");
    for entry in bundle.entries(variant) {
        write!(out, "{},{}", entry.sector, entry.distribution.total()).unwrap();
        match entry.distribution.frequencies() {
            Some(freqs) => {
                for &f in freqs {
                    write!(out, ",{}", fmt4(100.0 * f)).unwrap();
                }
            }
            None => out.push_str(&",".repeat(9)),
        }
        out.push('\n');
    }
    // Reference row carries no obs count.
    out.push_str("FSD BL,");
    for &b in reference.probabilities() {
        write!(out, ",{}", fmt4(100.0 * b)).unwrap();
    }
    out.push('\n');
    Ok(out)
}

/// Conformance table as CSV: sector, corr, chi2, M (pct points), d*, a*,
/// n, and the three verdict flags.
pub fn render_conformance_table(bundle: &ReportBundle, variant: Variant) -> Result<String, ReportError> {
    bundle.validate()?;
    let mut out =
        String::from("sector,corr,chi2,m_pct,d_star,a_star,n,sig_10pct,sig_5pct,sig_1pct\n");
    for entry in bundle.entries(variant) {
        let Some(report) = &entry.conformance else {
            continue;
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            report.sector,
            fmt4(report.correlation),
            fmt4(report.chi_square.statistic),
            fmt4(report.m_deviation),
            fmt4(report.d_star),
            fmt4(report.a_star),
            fmt_count(report.n),
            report.chi_square.significant_10,
            report.chi_square.significant_5,
            report.chi_square.significant_1,
        )
        .unwrap();
    }
    Ok(out)
}

/// Conformance table as aligned text, with `**` marking 1% significance on
/// the χ² column.
pub fn render_conformance_text(bundle: &ReportBundle, variant: Variant) -> Result<String, ReportError> {
    bundle.validate()?;
    let mut out = format!(
        "{:<8} {:>10} {:>12} {:>10} {:>8} {:>8} {:>8}\n",
        "sector", "corr", "chi2", "M(pct)", "d*", "a*", "n"
    );
    for entry in bundle.entries(variant) {
        let Some(report) = &entry.conformance else {
            continue;
        };
        let chi2 = if report.chi_square.significant_1 {
            format!("{}**", fmt4(report.chi_square.statistic))
        } else {
            fmt4(report.chi_square.statistic)
        };
        writeln!(
            out,
            "{:<8} {:>10} {:>12} {:>10} {:>8} {:>8} {:>8}",
            report.sector,
            fmt4(report.correlation),
            chi2,
            fmt4(report.m_deviation),
            fmt4(report.d_star),
            fmt4(report.a_star),
            fmt_count(report.n),
        )
        .unwrap();
    }
    Ok(out)
}

/// Descriptive statistics table: sector, n, mean, std dev, min, max.
pub fn render_descriptive_table(bundle: &ReportBundle, variant: Variant) -> Result<String, ReportError> {
    bundle.validate()?;
    let mut out = String::from("sector,n,mean,std_dev,min,max\n");
    for entry in bundle.entries(variant) {
        let Some(stats) = &entry.stats else {
            writeln!(out, "{},0,,,,", entry.sector).unwrap();
            continue;
        };
        writeln!(
            out,
            "{},{},{},{},{},{}",
            entry.sector,
            stats.n,
            fmt6(stats.mean),
            stats.std_dev.map(fmt6).unwrap_or_default(),
            fmt6(stats.min),
            fmt6(stats.max),
        )
        .unwrap();
    }
    Ok(out)
}

/// A filled histogram: contiguous bins of fixed width covering the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSpec {
    pub bin_width: f64,
    /// Left edge of the first bin.
    pub lo: f64,
    /// Right edge of the last bin.
    pub hi: f64,
    /// (left edge, count) pairs, contiguous, covering `[lo, hi)`.
    pub bins: Vec<(f64, u64)>,
}

/// Default histogram bin width, percentage points.
pub const DEFAULT_BIN_WIDTH: f64 = 1.0;

/// Bin a sample into `[k·w, (k+1)·w)` intervals derived from its min/max.
pub fn histogram_data(sample: &PooledSample, bin_width: f64) -> Result<HistogramSpec, ReportError> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(ReportError::BadBinWidth(bin_width));
    }
    let values = sample.values();
    if values.is_empty() {
        return Err(ReportError::EmptySample);
    }
    let index = |x: f64| (x / bin_width).floor() as i64;
    // Values are sorted ascending.
    let k_min = index(values[0]);
    let k_max = index(values[values.len() - 1]);
    let mut counts = vec![0u64; (k_max - k_min + 1) as usize];
    for &v in values {
        counts[(index(v) - k_min) as usize] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| ((k_min + i as i64) as f64 * bin_width, count))
        .collect();
    Ok(HistogramSpec {
        bin_width,
        lo: k_min as f64 * bin_width,
        hi: (k_max + 1) as f64 * bin_width,
        bins,
    })
}

/// One bar-chart row: observed vs. reference frequency for a digit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarChartRow {
    pub digit: u8,
    pub observed_percent: f64,
    pub benford_percent: f64,
}

/// Nine rows of (digit, observed %, Benford %) for side-by-side bars.
pub fn bar_chart_data(
    dist: &FsdDistribution,
    reference: &BenfordReference,
) -> Result<Vec<BarChartRow>, ReportError> {
    let freqs = dist.frequencies().ok_or(ReportError::EmptyDistribution)?;
    Ok((0..9)
        .map(|i| BarChartRow {
            digit: (i + 1) as u8,
            observed_percent: 100.0 * freqs[i],
            benford_percent: 100.0 * reference.probabilities()[i],
        })
        .collect())
}

/// Long-format histogram CSV for a set of sectors.
pub fn histogram_csv(specs: &[(String, HistogramSpec)]) -> String {
    let mut out = String::from("sector,bin_width,bin_left,count\n");
    for (sector, spec) in specs {
        for &(left, count) in &spec.bins {
            writeln!(out, "{},{},{},{}", sector, spec.bin_width, fmt4(left), count).unwrap();
        }
    }
    out
}

/// Long-format bar-chart CSV for a set of sectors.
pub fn bar_chart_csv(rows: &[(String, Vec<BarChartRow>)]) -> String {
    let mut out = String::from("sector,digit,observed_percent,benford_percent\n");
    for (sector, chart) in rows {
        for row in chart {
            writeln!(
                out,
                "{},{},{},{}",
                sector,
                row.digit,
                fmt4(row.observed_percent),
                fmt4(row.benford_percent)
            )
            .unwrap();
        }
    }
    out
}
