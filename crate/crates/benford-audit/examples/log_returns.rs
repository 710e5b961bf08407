//! Compute percentage log-returns for one price series.
//!
//! Returns are `100·ln(P_t / P_{t-1})`, computed only between consecutive
//! months; a missing month leaves a gap instead of a multi-month return.
//!
//! Run with: `cargo run --example log_returns`

use std::fs::File;
use std::path::Path;

use benford_audit::ingest::{
    compute_log_returns, parse_price_panel, pool_sector, DateFormat, ParseSchema,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/china_2000_2001.csv");
    let schema = ParseSchema {
        date_format: DateFormat::DayMonthYear2,
        ..ParseSchema::default()
    };
    let panel = parse_price_panel(File::open(&path)?, &schema, "sample")?;

    let mats = panel.get("China", "MATS").expect("series present");
    let returns = compute_log_returns(mats);
    println!("China/MATS: {} levels -> {} returns", mats.len(), returns.len());
    for &(month, r) in returns.points() {
        println!("  {month}  {r:>10.4} %");
    }

    // OIL starts three months late, so it has fewer returns.
    let oil = panel.get("China", "OIL").expect("series present");
    println!(
        "China/OIL:  {} levels -> {} returns",
        oil.len(),
        compute_log_returns(oil).len()
    );

    // Pool one sector across every country in the panel (here just one).
    let all_mats: Vec<_> = panel
        .series()
        .filter(|s| s.sector() == "MATS")
        .map(compute_log_returns)
        .collect();
    let pooled = pool_sector(&all_mats, "MATS")?;
    println!("pooled MATS sample: n = {}", pooled.n());
    Ok(())
}
