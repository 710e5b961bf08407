//! Detect stale repeated-value runs and produce an adapted panel.
//!
//! The bundled sample contains a seven-month run of one frozen index level
//! in the HEA sector, the kind of artifact a data vendor leaves behind when
//! a series stops updating. Screening flags such runs and deletes the stale
//! copies, leaving a calendar gap so no return bridges the deletion.
//!
//! Run with: `cargo run --example screen_repetitions`

use std::fs::File;
use std::path::Path;

use benford_audit::ingest::{parse_price_panel, DateFormat, ParseSchema};
use benford_audit::screening::{adapt_panel, detect_panel, ScreeningConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/china_2000_2001.csv");
    let schema = ParseSchema {
        date_format: DateFormat::DayMonthYear2,
        ..ParseSchema::default()
    };
    let panel = parse_price_panel(File::open(&path)?, &schema, "sample")?;

    let config = ScreeningConfig::default(); // min_run 4, drop-run-tail
    let flags = detect_panel(&panel, &config);
    println!("audit log ({} flags):", flags.len());
    for flag in &flags {
        println!("  {}", flag.audit_line());
    }

    let (adapted, summary) = adapt_panel(&panel, &flags, &config)?;
    println!("\nreturn counts (pooled per sector):");
    println!("  {:<8} {:>8} {:>8}", "sector", "before", "after");
    for counts in &summary.sector_return_counts {
        println!(
            "  {:<8} {:>8} {:>8}",
            counts.sector, counts.n_before, counts.n_after
        );
    }

    // The adapted panel is clean: re-screening finds nothing.
    assert!(detect_panel(&adapted, &config).is_empty());
    println!("\nadapted panel re-screens clean");
    Ok(())
}
