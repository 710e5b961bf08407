//! The whole pipeline in one call: ingest, screen, score, and write report
//! tables, exactly what the `benford-audit analyze` subcommand does.
//!
//! Run with: `cargo run --example full_pipeline`

use std::path::Path;

use benford_audit::cli::{cmd_analyze, resolve, Overrides};
use benford_audit::reporting::{render_conformance_text, Variant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/china_2000_2001.csv");
    let out = std::env::temp_dir().join("benford-audit-example");

    let config = resolve(Overrides {
        input: Some(input.display().to_string()),
        out: Some(out.display().to_string()),
        date_format: Some("DD/MM/YY".into()),
        min_run: Some("4".into()),
        policy: Some("drop-run-tail".into()),
        ..Overrides::default()
    })
    .map_err(|e| e.to_string())?;

    let bundle = cmd_analyze(&config).map_err(|e| e.to_string())?;

    println!("screening flags: {}", bundle.screening.flags.len());
    for flag in &bundle.screening.flags {
        println!("  {}", flag.audit_line());
    }

    println!("\nconformance, raw data:");
    print!("{}", render_conformance_text(&bundle, Variant::Raw)?);
    println!("\nconformance, adapted data:");
    print!("{}", render_conformance_text(&bundle, Variant::Adapted)?);

    println!("\nreport files written to {}:", out.display());
    let mut names: Vec<_> = std::fs::read_dir(&out)?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        println!("  {name}");
    }
    Ok(())
}
