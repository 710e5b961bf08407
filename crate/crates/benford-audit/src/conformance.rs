//! Scoring an observed FSD distribution against the Benford reference:
//! Pearson χ² with fixed critical values, correlation, maximum deviation M,
//! normalized Euclidean distance d*, and mean-digit distance a*, plus
//! descriptive statistics of the underlying return sample.
//!
//! All measures except χ² depend only on the digit frequencies, so
//! [`DigitFrequencies`] can be built either from a tallied
//! [`FsdDistribution`] or directly from a published frequency vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::FsdDistribution;
use crate::ingest::PooledSample;

/// Degrees of freedom of the 9-cell digit test.
pub const CHI_SQUARE_DF: u32 = 8;
/// χ²(8) critical value at the 10% level.
pub const CHI_SQUARE_CRITICAL_10: f64 = 13.36;
/// χ²(8) critical value at the 5% level.
pub const CHI_SQUARE_CRITICAL_5: f64 = 15.51;
/// χ²(8) critical value at the 1% level.
pub const CHI_SQUARE_CRITICAL_1: f64 = 20.09;

#[derive(Debug, Error)]
pub enum ConformanceError {
    #[error("empty digit distribution (no values carry a first significant digit)")]
    EmptyDistribution,
    #[error("frequency vector invalid: {0}")]
    InvalidFrequencies(String),
    #[error("correlation undefined: observed frequencies have zero variance")]
    ZeroVariance,
    #[error("empty sample")]
    EmptySample,
}

/// The Benford first-digit reference distribution and its derived constants.
///
/// `b_d = log10(1 + 1/d)`. The mean digit and the d* normalizer are computed
/// from `b`, never hardcoded; the normalizer is the squared Euclidean
/// distance from `b` to the most distant digit distribution (all mass on 9),
/// which makes it the largest value the d* numerator can attain squared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenfordReference {
    b: [f64; 9],
    mean_digit: f64,
    d_star_normalizer: f64,
}

impl BenfordReference {
    pub fn new() -> Self {
        let mut b = [0.0; 9];
        for (i, slot) in b.iter_mut().enumerate() {
            let d = (i + 1) as f64;
            *slot = (1.0 + 1.0 / d).log10();
        }
        let mean_digit = b
            .iter()
            .enumerate()
            .map(|(i, &p)| (i + 1) as f64 * p)
            .sum();
        let d_star_normalizer = b
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let vertex = if i == 8 { 1.0 } else { 0.0 };
                (vertex - p) * (vertex - p)
            })
            .sum();
        Self {
            b,
            mean_digit,
            d_star_normalizer,
        }
    }

    /// Digit probabilities `b_1..b_9` as fractions.
    pub fn probabilities(&self) -> &[f64; 9] {
        &self.b
    }

    /// Mean digit under the reference, `Σ d·b_d` (≈ 3.4402370).
    pub fn mean_digit(&self) -> f64 {
        self.mean_digit
    }

    /// Normalizer for the table-consistent d* (≈ 1.0739384).
    pub fn d_star_normalizer(&self) -> f64 {
        self.d_star_normalizer
    }

    /// Largest attainable table-consistent d*, reached when all mass sits on
    /// digit 9 (= 1/√normalizer ≈ 0.9649622).
    pub fn d_star_max(&self) -> f64 {
        1.0 / self.d_star_normalizer.sqrt()
    }
}

impl Default for BenfordReference {
    fn default() -> Self {
        Self::new()
    }
}

/// An observed digit-frequency vector with its effective sample size.
///
/// `n` need not be integral: feeding a published frequency table with its
/// reported observation count is supported directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitFrequencies {
    freqs: [f64; 9],
    n: f64,
}

impl DigitFrequencies {
    pub fn from_distribution(dist: &FsdDistribution) -> Result<Self, ConformanceError> {
        let freqs = dist
            .frequencies()
            .ok_or(ConformanceError::EmptyDistribution)?;
        Ok(Self {
            freqs: *freqs,
            n: dist.total() as f64,
        })
    }

    /// Build from fractions summing to 1 and a positive n.
    ///
    /// The sum tolerance is 1e-4: loose enough for frequency tables printed
    /// to 4 decimal places in percent, tight enough to reject unnormalized
    /// vectors.
    pub fn from_fractions(freqs: [f64; 9], n: f64) -> Result<Self, ConformanceError> {
        if !(n.is_finite() && n > 0.0) {
            return Err(ConformanceError::InvalidFrequencies(format!(
                "n must be positive, got {n}"
            )));
        }
        if freqs.iter().any(|&f| !(f.is_finite() && f >= 0.0)) {
            return Err(ConformanceError::InvalidFrequencies(
                "frequencies must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = freqs.iter().sum();
        if (sum - 1.0).abs() > 1e-4 {
            return Err(ConformanceError::InvalidFrequencies(format!(
                "frequencies sum to {sum}, expected 1"
            )));
        }
        Ok(Self { freqs, n })
    }

    /// Build from percentages summing to 100 (within 1e-2).
    pub fn from_percentages(percents: [f64; 9], n: f64) -> Result<Self, ConformanceError> {
        let mut freqs = [0.0; 9];
        for (f, &p) in freqs.iter_mut().zip(&percents) {
            *f = p / 100.0;
        }
        Self::from_fractions(freqs, n)
    }

    /// Frequencies as fractions.
    pub fn fractions(&self) -> &[f64; 9] {
        &self.freqs
    }

    /// Effective sample size.
    pub fn n(&self) -> f64 {
        self.n
    }

    /// Mean digit of the observed distribution, `Σ d·e_d`.
    pub fn mean_digit(&self) -> f64 {
        self.freqs
            .iter()
            .enumerate()
            .map(|(i, &f)| (i + 1) as f64 * f)
            .sum()
    }
}

/// χ² statistic with verdicts at the three fixed critical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: u32,
    pub significant_10: bool,
    pub significant_5: bool,
    pub significant_1: bool,
}

impl ChiSquareResult {
    pub fn from_statistic(statistic: f64) -> Self {
        Self {
            statistic,
            df: CHI_SQUARE_DF,
            significant_10: statistic >= CHI_SQUARE_CRITICAL_10,
            significant_5: statistic >= CHI_SQUARE_CRITICAL_5,
            significant_1: statistic >= CHI_SQUARE_CRITICAL_1,
        }
    }
}

/// Pearson's χ² on the 9 digit cells: `Σ (O_d − E_d)² / E_d` with
/// `O_d = n·e_d` and `E_d = n·b_d`, equivalently `n·Σ (e_d − b_d)²/b_d`.
pub fn chi_square(observed: &DigitFrequencies, reference: &BenfordReference) -> ChiSquareResult {
    let n = observed.n();
    let statistic = observed
        .fractions()
        .iter()
        .zip(reference.probabilities())
        .map(|(&e, &b)| {
            let o = n * e;
            let expected = n * b;
            let diff = o - expected;
            diff * diff / expected
        })
        .sum();
    ChiSquareResult::from_statistic(statistic)
}

/// Product-moment correlation of two 9-vectors; `None` when either side has
/// zero variance (all components equal).
pub fn pearson(x: &[f64; 9], y: &[f64; 9]) -> Option<f64> {
    let constant = |v: &[f64; 9]| v.iter().all(|&a| a == v[0]);
    if constant(x) || constant(y) {
        return None;
    }
    let mean = |v: &[f64; 9]| v.iter().sum::<f64>() / 9.0;
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Pearson correlation between observed and reference digit frequencies.
pub fn pearson_correlation(
    observed: &DigitFrequencies,
    reference: &BenfordReference,
) -> Result<f64, ConformanceError> {
    pearson(observed.fractions(), reference.probabilities())
        .ok_or(ConformanceError::ZeroVariance)
}

/// Maximum absolute deviation `M = max_d |e_d − b_d|`, in percentage points.
pub fn max_deviation(observed: &DigitFrequencies, reference: &BenfordReference) -> f64 {
    observed
        .fractions()
        .iter()
        .zip(reference.probabilities())
        .map(|(&e, &b)| (e - b).abs())
        .fold(0.0, f64::max)
        * 100.0
}

/// Normalization applied to the d* Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DStarMode {
    /// Divide by the reference's fixed normalizer (default); values then
    /// range over `[0, 1/√normalizer]`.
    TableConsistent,
    /// Divide by this sample's own maximum deviation M (fraction units).
    LiteralEq3,
}

impl DStarMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DStarMode::TableConsistent => "table-consistent",
            DStarMode::LiteralEq3 => "literal-eq3",
        }
    }
}

impl fmt::Display for DStarMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DStarMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "table-consistent" => Ok(DStarMode::TableConsistent),
            "literal-eq3" => Ok(DStarMode::LiteralEq3),
            other => Err(format!(
                "unknown d* mode {other:?} (expected \"table-consistent\" or \"literal-eq3\")"
            )),
        }
    }
}

/// d* value plus a degeneracy flag for the literal mode's M = 0 case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DStar {
    pub value: f64,
    pub mode: DStarMode,
    /// Set only in literal mode when M = 0 forced the 0-by-convention value.
    pub degenerate: bool,
}

/// Normalized Euclidean distance between observed and reference frequencies.
pub fn d_star(
    observed: &DigitFrequencies,
    reference: &BenfordReference,
    mode: DStarMode,
) -> DStar {
    let sum_sq: f64 = observed
        .fractions()
        .iter()
        .zip(reference.probabilities())
        .map(|(&e, &b)| (e - b) * (e - b))
        .sum();
    let distance = sum_sq.sqrt();
    match mode {
        DStarMode::TableConsistent => DStar {
            value: distance / reference.d_star_normalizer(),
            mode,
            degenerate: false,
        },
        DStarMode::LiteralEq3 => {
            let m_fraction = max_deviation(observed, reference) / 100.0;
            if m_fraction == 0.0 {
                // Perfect conformance: distance is also 0; define d* = 0.
                DStar {
                    value: 0.0,
                    mode,
                    degenerate: true,
                }
            } else {
                DStar {
                    value: distance / m_fraction,
                    mode,
                    degenerate: false,
                }
            }
        }
    }
}

/// Mean-digit distance `a* = |m_e − m_b| / (9 − m_b)`.
///
/// The denominator is the largest difference any digit distribution can
/// reach: the observed mean lies in `[1, 9]` and `9 − m_b > m_b − 1`.
pub fn a_star(observed: &DigitFrequencies, reference: &BenfordReference) -> f64 {
    (observed.mean_digit() - reference.mean_digit()).abs() / (9.0 - reference.mean_digit())
}

/// Sample statistics of pooled returns, in percent units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n−1 denominator); `None` when n < 2.
    pub std_dev: Option<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn descriptive_stats(sample: &PooledSample) -> Result<DescriptiveStats, ConformanceError> {
    let values = sample.values();
    if values.is_empty() {
        return Err(ConformanceError::EmptySample);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std_dev = if n >= 2 {
        let ss: f64 = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        Some((ss / (n - 1) as f64).sqrt())
    } else {
        None
    };
    // Values are sorted ascending by construction.
    Ok(DescriptiveStats {
        n,
        mean,
        std_dev,
        min: values[0],
        max: values[n - 1],
    })
}

/// One sector's full conformance row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub sector: String,
    pub n: f64,
    pub chi_square: ChiSquareResult,
    pub correlation: f64,
    /// Maximum deviation M, percentage points.
    pub m_deviation: f64,
    pub d_star: f64,
    pub d_star_mode: DStarMode,
    pub a_star: f64,
}

/// Bundle the five measures for one sector.
pub fn conformance_report(
    sector: &str,
    observed: &DigitFrequencies,
    reference: &BenfordReference,
    mode: DStarMode,
) -> Result<ConformanceReport, ConformanceError> {
    Ok(ConformanceReport {
        sector: sector.to_string(),
        n: observed.n(),
        chi_square: chi_square(observed, reference),
        correlation: pearson_correlation(observed, reference)?,
        m_deviation: max_deviation(observed, reference),
        d_star: d_star(observed, reference, mode).value,
        d_star_mode: mode,
        a_star: a_star(observed, reference),
    })
}
