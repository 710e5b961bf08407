//! Benford's-law conformance auditing for panel price-index data.
//!
//! The crate turns a long-format panel of monthly index levels into
//! percentage log-returns, screens the raw levels for stale repeated-value
//! runs, tallies first significant digits, and scores each sector's digit
//! distribution against the Benford reference with a χ² test, Pearson
//! correlation, and three distance measures (M, d*, a*). Report tables and
//! plot-ready histogram/bar-chart data are emitted as CSV and JSON.
//!
//! The pipeline stages are plain functions over immutable values:
//!
//! ```text
//! ingest::parse_price_panel -> screening::adapt_panel -> ingest::pool_sector
//!     -> digits::FsdDistribution -> conformance::* -> reporting::*
//! ```
//!
//! Each stage can be used on its own; see the `examples/` directory for one
//! runnable example per capability. The `cli` module (and the thin
//! `benford-audit` binary) orchestrates the whole run.

pub mod cli;
pub mod conformance;
pub mod digits;
pub mod ingest;
pub mod reporting;
pub mod screening;

pub use conformance::{BenfordReference, ConformanceReport, DStarMode, DigitFrequencies};
pub use digits::{Digit, FsdDistribution};
pub use ingest::{ObservationDate, PooledSample, PricePanel, PriceSeries, ReturnSeries};
pub use screening::{RepetitionFlag, ScreeningConfig, ScreeningSummary};
