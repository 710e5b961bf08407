//! Tally first significant digits of a return sample.
//!
//! Exact zeros carry no first significant digit; they are excluded from the
//! frequency denominator but counted, so nothing disappears silently.
//!
//! Run with: `cargo run --example fsd_digits`

use std::fs::File;
use std::path::Path;

use benford_audit::digits::{first_significant_digit, FsdDistribution};
use benford_audit::ingest::{
    compute_log_returns, parse_price_panel, pool_sector, DateFormat, ParseSchema,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for value in [393.85, -0.00479, 6.3189, 0.0] {
        match first_significant_digit(value)? {
            Some(digit) => println!("FSD({value}) = {}", digit.get()),
            None => println!("FSD({value}) = none (zero has no significant digit)"),
        }
    }

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/china_2000_2001.csv");
    let schema = ParseSchema {
        date_format: DateFormat::DayMonthYear2,
        ..ParseSchema::default()
    };
    let panel = parse_price_panel(File::open(&path)?, &schema, "sample")?;

    // HEA's frozen seven-month run produces six exact-zero returns.
    let hea: Vec<_> = panel
        .series()
        .filter(|s| s.sector() == "HEA")
        .map(compute_log_returns)
        .collect();
    let sample = pool_sector(&hea, "HEA")?;
    let dist = FsdDistribution::from_sample(&sample)?;
    println!(
        "\nHEA: {} returns, {} with an FSD, {} zeros excluded",
        sample.n(),
        dist.total(),
        dist.excluded()
    );
    print!("{}", dist.digit_csv());
    Ok(())
}
