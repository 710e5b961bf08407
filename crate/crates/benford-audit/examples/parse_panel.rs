//! Parse a delimiter-separated panel file into a `PricePanel`.
//!
//! The bundled sample is one country's monthly sector index levels for
//! June 2000 through May 2001, with two sectors partially or fully missing.
//!
//! Run with: `cargo run --example parse_panel`

use std::fs::File;
use std::path::Path;

use benford_audit::ingest::{parse_price_panel, DateFormat, ParseSchema};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/china_2000_2001.csv");
    let schema = ParseSchema {
        date_format: DateFormat::DayMonthYear2,
        ..ParseSchema::default()
    };
    let panel = parse_price_panel(File::open(&path)?, &schema, &path.display().to_string())?;

    println!("parsed {} series from {}", panel.len(), panel.provenance());
    for series in panel.series() {
        let range = match (series.points().first(), series.points().last()) {
            (Some(&(first, _)), Some(&(last, _))) => format!("{first}..{last}"),
            _ => "empty".to_string(),
        };
        println!(
            "  {:<8} {:<6} {:>2} observations  {}",
            series.country(),
            series.sector(),
            series.len(),
            range
        );
    }
    Ok(())
}
