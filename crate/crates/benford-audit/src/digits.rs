//! First-significant-digit extraction and FSD frequency distributions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::PooledSample;

#[derive(Debug, Error)]
pub enum DigitsError {
    #[error("first significant digit of non-finite value {0}")]
    NonFinite(f64),
    #[error("digit {0} out of range 1..=9")]
    OutOfRange(u8),
}

/// A first significant digit, 1..=9.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Digit(u8);

impl Digit {
    pub fn new(d: u8) -> Result<Self, DigitsError> {
        if (1..=9).contains(&d) {
            Ok(Self(d))
        } else {
            Err(DigitsError::OutOfRange(d))
        }
    }

    pub fn get(&self) -> u8 {
        self.0
    }

    /// Zero-based position in a 9-vector (digit 1 -> 0).
    pub fn index(&self) -> usize {
        (self.0 - 1) as usize
    }
}

/// The leading nonzero decimal digit of `x`, or `None` for exact zero.
///
/// Sign and decimal point are ignored. The value is normalized into
/// `[1, 10)` arithmetically by repeated scaling with 10, followed by a
/// one-step guard that corrects floating-point boundary overshoot; string
/// formatting is never involved, so the result reflects the full binary
/// value as parsed.
pub fn first_significant_digit(x: f64) -> Result<Option<Digit>, DigitsError> {
    if !x.is_finite() {
        return Err(DigitsError::NonFinite(x));
    }
    if x == 0.0 {
        return Ok(None);
    }
    let mut mantissa = x.abs();
    while mantissa >= 10.0 {
        mantissa /= 10.0;
    }
    while mantissa < 1.0 {
        mantissa *= 10.0;
    }
    if mantissa >= 10.0 {
        mantissa /= 10.0;
    }
    let digit = mantissa as u8;
    Ok(Some(Digit::new(digit.clamp(1, 9)).expect("in range")))
}

/// First-significant-digit tally of a sample.
///
/// `total` counts the values that carry an FSD; exact zeros are tallied in
/// `excluded` and do not enter the frequency denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsdDistribution {
    counts: [u64; 9],
    total: u64,
    excluded: u64,
    frequencies: Option<[f64; 9]>,
}

impl FsdDistribution {
    pub fn from_counts(counts: [u64; 9], excluded: u64) -> Self {
        let total: u64 = counts.iter().sum();
        let frequencies = if total > 0 {
            let n = total as f64;
            let mut freqs = [0.0; 9];
            for (f, &c) in freqs.iter_mut().zip(&counts) {
                *f = c as f64 / n;
            }
            Some(freqs)
        } else {
            None
        };
        Self {
            counts,
            total,
            excluded,
            frequencies,
        }
    }

    /// Tally an iterator of finite values.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Result<Self, DigitsError> {
        let mut counts = [0u64; 9];
        let mut excluded = 0u64;
        for value in values {
            match first_significant_digit(value)? {
                Some(digit) => counts[digit.index()] += 1,
                None => excluded += 1,
            }
        }
        Ok(Self::from_counts(counts, excluded))
    }

    pub fn from_sample(sample: &PooledSample) -> Result<Self, DigitsError> {
        Self::from_values(sample.values().iter().copied())
    }

    pub fn counts(&self) -> &[u64; 9] {
        &self.counts
    }

    /// Number of values with an FSD (the frequency denominator N).
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of exact zeros excluded from N.
    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Digit frequencies as fractions, or `None` when the distribution is
    /// empty after exclusions.
    pub fn frequencies(&self) -> Option<&[f64; 9]> {
        self.frequencies.as_ref()
    }

    /// Merge two tallies (associative, commutative).
    pub fn merge(&self, other: &Self) -> Self {
        let mut counts = self.counts;
        for (c, o) in counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        Self::from_counts(counts, self.excluded + other.excluded)
    }

    /// One row per digit: `digit,count,frequency_percent`.
    pub fn digit_csv(&self) -> String {
        let mut out = String::from("digit,count,frequency_percent\n");
        for d in 0..9 {
            let freq = match self.frequencies {
                Some(freqs) => format!("{:.4}", 100.0 * freqs[d]),
                None => String::new(),
            };
            out.push_str(&format!("{},{},{}\n", d + 1, self.counts[d], freq));
        }
        out
    }
}
